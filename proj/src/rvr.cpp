#include "sosp/rvr.hpp"

#include <cmath>

#include "sosp/errors.hpp"
#include "sosp/numeric.hpp"

namespace sosp {

namespace {
constexpr double kMaxPathSteps = 1e9;
constexpr uint64_t kCompensateAbove = 10000;
}  // namespace

void RvrConfig::validate() const {
  if (!(epsilon > 0.0)) throw ConfigError("rvr: epsilon must be > 0");
  if (!(reset_prob > 0.0 && reset_prob <= 1.0)) throw ConfigError("rvr: reset_prob must be in (0, 1]");
  if (!(sigma1 >= 0.0) || !(sigma2 >= 0.0)) throw ConfigError("rvr: sigmas must be >= 0");
  if (!(l2 > 0.0)) throw ConfigError("rvr: l2 must be > 0");
}

uint64_t RvrConfig::fresh_batch() const {
  if (sigma1 == 0.0) return 1;
  const double n = ceil_tol(5.0 * sigma1 * sigma1 / (epsilon * epsilon));
  if (n > kMaxPathSteps) throw ConfigError("rvr: fresh batch size exceeds 1e9");
  return std::max<uint64_t>(1, uint64_t(n));
}

uint64_t RvrConfig::path_steps(double dx_norm) const {
  const double k = ceil_tol(5.0 * (sigma2 * sigma2 + l2 * epsilon) / (reset_prob * epsilon * epsilon) *
                            dx_norm * dx_norm);
  if (!(k <= kMaxPathSteps))
    throw ConfigError("rvr: path length exceeds 1e9 (epsilon too small for this step and reset rate)");
  return uint64_t(k);
}

Vec rvr_estimate(EstimatorState& state, const Vec& x, const RvrConfig& cfg, StochasticOracle& oracle,
                 CounterRng& coin_rng, RvrCallInfo* info) {
  cfg.validate();
  const bool coin = coin_rng.bernoulli(cfg.reset_prob);
  RvrCallInfo local;
  Vec g;
  if (coin || !state.has_estimate()) {
    const uint64_t n = cfg.fresh_batch();
    g = Vec::Zero(x.size());
    for (uint64_t j = 0; j < n; ++j) g += oracle.query_grad(x);
    g /= double(n);
    local.fresh = true;
    local.queries = n;
  } else {
    const Vec& xp = *state.x_prev;
    const Vec dx = x - xp;
    const uint64_t K = cfg.path_steps(dx.norm());
    local.path_steps = K;
    local.queries = K;
    if (K == 0) {
      g = *state.g_prev;
    } else {
      const Vec dir = dx / double(K);
      auto point = [&](uint64_t k) -> Vec {
        const double a = double(k) / double(K);
        return a * x + (1.0 - a) * xp;
      };
      if (K > kCompensateAbove) {
        KahanSum<Vec> acc(*state.g_prev);
        for (uint64_t k = 1; k <= K; ++k) acc.add(oracle.query_hvp(point(k - 1), dir));
        g = acc.result();
      } else {
        g = *state.g_prev;
        for (uint64_t k = 1; k <= K; ++k) g += oracle.query_hvp(point(k - 1), dir);
      }
    }
  }
  state.x_prev = x;
  state.g_prev = g;
  if (info) *info = local;
  return g;
}

double expected_query_budget(const RvrConfig& cfg, double dx_norm) {
  const double e2 = cfg.epsilon * cfg.epsilon;
  const double b = cfg.reset_prob;
  return 6.0 * (1.0 + b * cfg.sigma1 * cfg.sigma1 / e2 +
                (cfg.sigma2 * cfg.sigma2 + cfg.l2 * cfg.epsilon) * dx_norm * dx_norm / (b * e2));
}

ErrorSuiteResult estimator_error_suite(const ProblemInstance& inst, const Vec& x0, const TrajectoryStep& step,
                                       const RvrConfig& cfg, int steps, int replications, uint64_t seed) {
  if (steps < 1 || replications < 1) throw ConfigError("error suite: steps and replications must be >= 1");
  ErrorSuiteResult res;
  res.mean_sq_error.assign(steps, 0.0);
  res.mean_queries.assign(steps, 0.0);
  std::vector<double> per_rep(replications, 0.0);
  for (int r = 0; r < replications; ++r) {
    auto oracle = inst.make_oracle(derive_seed(seed, "oracle", {uint64_t(r)}));
    CounterRng coins(derive_seed(seed, "algorithm", {uint64_t(r)}));
    EstimatorState st;
    Vec x = x0;
    for (int t = 0; t < steps; ++t) {
      RvrCallInfo info;
      const Vec g = rvr_estimate(st, x, cfg, *oracle, coins, &info);
      const double e = (g - inst.objective->gradient(x)).squaredNorm();
      res.mean_sq_error[t] += e / replications;
      res.mean_queries[t] += double(info.queries) / replications;
      per_rep[r] += e / steps;
      x = step(x, g);
    }
  }
  double m = 0.0;
  for (double v : per_rep) m += v;
  m /= replications;
  double var = 0.0;
  for (double v : per_rep) var += (v - m) * (v - m);
  res.overall_mean = m;
  res.overall_stderr = replications > 1 ? std::sqrt(var / (replications - 1) / replications) : 0.0;
  for (double v : res.mean_sq_error) res.max_step_mean = std::max(res.max_step_mean, v);
  return res;
}

}  // namespace sosp
