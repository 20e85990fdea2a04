#include "sosp/curvature.hpp"

#include <cmath>

#include "sosp/errors.hpp"
#include "sosp/linalg.hpp"
#include "sosp/numeric.hpp"

namespace sosp {

OjaBudget oja_budget(int dim, double gamma, double delta_fail, double l1, double noise_bound) {
  if (!(gamma > 0.0)) throw ConfigError("oja: gamma must be > 0");
  if (!(delta_fail > 0.0 && delta_fail < 1.0)) throw ConfigError("oja: delta must be in (0, 1)");
  if (!std::isfinite(l1)) throw ContractError("oja: needs a finite gradient Lipschitz constant");
  const double p = 2.0 * gamma;
  const double lg = std::max(1.0, std::log(double(dim) / delta_fail));
  const double n = ceil_tol((noise_bound + l1) * (noise_bound + l1) / (4.0 * p * p) * lg * lg);
  const double m = ceil_tol(9.0 * noise_bound * noise_bound * std::log(2.0 / delta_fail) / (gamma * gamma));
  if (n > 1e9 || m > 1e9) throw ConfigError("oja: budget exceeds 1e9 queries");
  return {uint64_t(std::max(1.0, n)), uint64_t(std::max(1.0, m)), 1.0 / (l1 + noise_bound)};
}

CurvatureCertificate oja_search(StochasticOracle& oracle, const Vec& x, double gamma, double delta_fail,
                                CounterRng& rng) {
  const std::optional<double> bound = oracle.hessian_noise_bound();
  if (!bound) throw ContractError("oja: oracle has no almost-sure Hessian noise bound");
  const OjaBudget bud = oja_budget(oracle.dim(), gamma, delta_fail, oracle.regularity().l1, *bound);
  CurvatureCertificate cert;
  Vec w = rng.unit_vector(oracle.dim());
  for (uint64_t t = 0; t < bud.iterations; ++t) {
    w -= bud.step_size * oracle.query_hvp(x, w);
    const double n = w.norm();
    if (!(n > 0.0)) w = rng.unit_vector(oracle.dim());
    else w /= n;
  }
  double acc = 0.0;
  for (uint64_t j = 0; j < bud.verification_samples; ++j) acc += w.dot(oracle.query_hvp(x, w));
  cert.rayleigh_estimate = acc / double(bud.verification_samples);
  cert.iterations = bud.iterations;
  cert.verification_samples = bud.verification_samples;
  cert.queries_used = bud.iterations + bud.verification_samples;
  if (cert.rayleigh_estimate <= -3.0 * gamma) cert.direction = w;
  return cert;
}

std::optional<Vec> exact_curvature_direction(const Mat& H, double gamma, bool assume_tridiagonal) {
  const SymEig e = sym_eig_auto(H, assume_tridiagonal);
  if (!(e.values[0] <= -4.0 * gamma)) return std::nullopt;
  Vec u = e.vectors.col(0);
  Eigen::Index k;
  u.cwiseAbs().maxCoeff(&k);
  if (u[k] < 0.0) u = -u;
  return u / u.norm();
}

Vec curvature_step(const Vec& x, const Vec& u, double gamma, double l2, CounterRng& rng) {
  const double r = rng.rademacher();
  return x + (gamma / l2 * r) * u;
}

}  // namespace sosp
