#pragma once

#include <algorithm>
#include <cmath>

namespace sosp {

// Ceiling that ignores round-off a few ulps above an integer.
inline double ceil_tol(double v) {
  if (!std::isfinite(v)) return v;
  return std::ceil(v - 1e-12 * std::max(1.0, std::fabs(v)));
}

// Natural log of the dimension, floored at 1.
inline double log_dim(int d) { return std::max(1.0, std::log(double(d))); }

// Neumaier compensated summation for vectors.
template <class V>
struct KahanSum {
  V sum, comp;
  explicit KahanSum(const V& init) : sum(init), comp(V::Zero(init.size())) {}
  void add(const V& term) {
    V t = sum + term;
    for (int i = 0; i < t.size(); ++i) {
      if (std::fabs(sum[i]) >= std::fabs(term[i])) comp[i] += (sum[i] - t[i]) + term[i];
      else comp[i] += (term[i] - t[i]) + sum[i];
    }
    sum = t;
  }
  V result() const { return sum + comp; }
};

}  // namespace sosp
