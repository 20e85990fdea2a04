#pragma once

#include <cmath>
#include <sstream>
#include <string>

#include "sosp/oracle.hpp"
#include "sosp/properties.hpp"

namespace sosp::detail {

inline Vec uniform_box(CounterRng& r, int d, double lo, double hi) {
  Vec x(d);
  for (int i = 0; i < d; ++i) x[i] = lo + (hi - lo) * r.uniform();
  return x;
}

inline Mat random_symmetric(CounterRng& r, int d, double scale = 1.0) {
  Mat A(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) A(i, j) = r.normal();
  return scale * 0.5 * (A + A.transpose());
}

inline Mat random_orthogonal(CounterRng& r, int d) {
  Mat A(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) A(i, j) = r.normal();
  Eigen::HouseholderQR<Mat> qr(A);
  return qr.householderQ() * Mat::Identity(d, d);
}

// Number formatting for detail strings.
template <class... A>
std::string fmt(const A&... parts) {
  std::ostringstream os;
  os.precision(6);
  (os << ... << parts);
  return os.str();
}

// Failed result carrying the exception text.
inline PropertyResult failed(std::string name, const std::exception& e) {
  PropertyResult r;
  r.name = std::move(name);
  r.passed = false;
  r.margin = -1.0;
  r.detail = std::string("exception: ") + e.what();
  return r;
}

// Binomial proportion check: count/n >= target.
inline PropertyResult fraction_at_least(std::string name, int count, int n, double target) {
  return at_least(std::move(name), double(count) / double(n), target, fmt(count, "/", n));
}

}  // namespace sosp::detail
