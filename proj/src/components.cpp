#include "sosp/components.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace sosp {

namespace {
const double kSqrtE = std::sqrt(std::numbers::e);
}

double psi(double x, int order) {
  if (x <= 0.5) return 0.0;
  const double a = 2.0 * x - 1.0;
  const double e = std::exp(1.0 - 1.0 / (a * a));
  if (e == 0.0) return 0.0;
  // With v = 1 - a^-2: v' = 4 a^-3, v'' = -24 a^-4, v''' = 192 a^-5.
  const double d1 = 4.0 / (a * a * a);
  const double d2 = -24.0 / (a * a * a * a);
  const double d3 = 192.0 / (a * a * a * a * a);
  switch (order) {
    case 0: return e;
    case 1: return e * d1;
    case 2: return e * (d1 * d1 + d2);
    case 3: return e * (d1 * d1 * d1 + 3.0 * d1 * d2 + d3);
    default: throw std::invalid_argument("psi: order must be 0..3");
  }
}

double phi(double x, int order) {
  const double g = kSqrtE * std::exp(-0.5 * x * x);
  switch (order) {
    case 0: return kSqrtE * std::sqrt(std::numbers::pi / 2.0) * std::erfc(-x / std::numbers::sqrt2);
    case 1: return g;
    case 2: return -x * g;
    case 3: return (x * x - 1.0) * g;
    default: throw std::invalid_argument("phi: order must be 0..3");
  }
}

double lambda_fn(double x, int order) {
  const double e = std::exp(-0.5 * x * x);
  switch (order) {
    case 0: return 8.0 * (e - 1.0);
    case 1: return -8.0 * x * e;
    case 2: return 8.0 * (x * x - 1.0) * e;
    case 3: return 8.0 * (3.0 * x - x * x * x) * e;
    default: throw std::invalid_argument("lambda_fn: order must be 0..3");
  }
}

}  // namespace sosp
