#include "sosp/mss.hpp"

#include <cmath>

#include "sosp/errors.hpp"

namespace sosp {

Vec finite_diff_hvp(StochasticOracle& oracle, const Vec& x, const Vec& u, double delta) {
  if (!(delta > 0.0)) throw InputError("finite_diff_hvp: delta must be > 0");
  if (!oracle.noise().n_point() || oracle.noise().query_points < 2)
    throw ContractError("finite_diff_hvp: needs an n-point oracle with n >= 2");
  if (u.size() != x.size() || std::fabs(u.norm() - 1.0) > 1e-9)
    throw InputError("finite_diff_hvp: direction must be a unit vector of matching dimension");
  const std::vector<Vec> g = oracle.query_grad_multi({x + delta * u, x});
  return (g[0] - g[1]) / delta;
}

MssReport verify_mss_equivalence(StochasticOracle& oracle, const MssOptions& opt) {
  if (!opt.diagnostic && !oracle.jacobian_consistent())
    throw ContractError("verify_mss_equivalence: oracle's Hessian is not the Jacobian of its gradient");
  if (!oracle.noise().n_point()) throw ContractError("verify_mss_equivalence: needs an n-point oracle");
  if (opt.samples < 1) throw ConfigError("verify_mss_equivalence: samples must be >= 1");

  const Objective& f = oracle.objective();
  const int d = f.dim();
  CounterRng rng(opt.seed);
  MssReport rep;
  const double s2 = oracle.noise().sigma2_as.value_or(oracle.noise().sigma2);
  rep.bound = s2 * s2;

  const double scales[] = {1.0, 1e-1, 1e-2, 1e-3, 1e-4};
  double first_anti = -1.0, last_anti = 0.0;
  for (double r : scales) {
    for (bool anti : {false, true}) {
      const Vec u = rng.unit_vector(d);
      Vec x, y;
      if (anti) {
        x = 0.5 * r * u;
        y = -0.5 * r * u;
      } else {
        x = Vec::Zero(d);
        for (int i = 0; i < d; ++i) x[i] = 2.0 * rng.uniform() - 1.0;
        y = x + r * u;
      }
      const Vec exact = f.gradient(x) - f.gradient(y);
      const double sep2 = (x - y).squaredNorm();
      double acc = 0.0;
      for (int k = 0; k < opt.samples; ++k) {
        const std::vector<Vec> g = oracle.query_grad_multi({x, y});
        acc += (g[0] - g[1] - exact).squaredNorm();
      }
      const double ratio = acc / opt.samples / sep2;
      rep.probes.push_back({std::sqrt(sep2), ratio, anti});
      rep.max_ratio = std::max(rep.max_ratio, ratio);
      if (anti) {
        if (first_anti < 0.0) first_anti = ratio;
        last_anti = ratio;
      }
    }
  }
  rep.within_bound = rep.max_ratio <= rep.bound * (1.0 + opt.tolerance);
  rep.diverging = !rep.within_bound && last_anti > 100.0 * std::max(first_anti, 1e-300);
  return rep;
}

}  // namespace sosp
