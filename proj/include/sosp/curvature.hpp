#pragma once

#include <optional>

#include "sosp/oracle.hpp"

namespace sosp {

struct CurvatureCertificate {
  std::optional<Vec> direction;    // empty = no negative curvature certified
  double rayleigh_estimate = 0.0;  // mean of the verification Rayleigh quotients
  uint64_t queries_used = 0;
  uint64_t iterations = 0;
  uint64_t verification_samples = 0;
};

struct OjaBudget {
  uint64_t iterations;
  uint64_t verification_samples;
  double step_size;
};

// Iteration count ceil((s + L1)^2 / (4 p^2) log^2(d / delta)) at precision
// p = 2 gamma, verification count ceil(9 s^2 ln(2/delta) / gamma^2) (>= 1)
// and step 1/(L1 + s), where s is the almost-sure Hessian noise bound.
OjaBudget oja_budget(int dim, double gamma, double delta_fail, double l1, double noise_bound);

// Stochastic power iteration w <- normalize(w - eta H_t w) with fresh HVP draws,
// then a verification phase; accepts only if the mean Rayleigh quotient is at
// most -3 gamma.  Success contract: a returned u has <u, H u> <= -2 gamma, and
// an empty result means H >= -4 gamma I, each with probability >= 1 - delta_fail.
CurvatureCertificate oja_search(StochasticOracle& oracle, const Vec& x, double gamma, double delta_fail,
                                CounterRng& rng);

// Bottom eigenvector of H if lambda_min(H) <= -4 gamma (inclusive).
std::optional<Vec> exact_curvature_direction(const Mat& H, double gamma, bool assume_tridiagonal = false);

// x + (gamma / L2) r u with r uniform on {-1, +1}.
Vec curvature_step(const Vec& x, const Vec& u, double gamma, double l2, CounterRng& rng);

}  // namespace sosp
