#include <cmath>

#include "property_util.hpp"
#include "sosp/errors.hpp"
#include "sosp/problems.hpp"
#include "sosp/rvr.hpp"
#include "sosp/solvers.hpp"

namespace sosp::props {

using detail::fmt;

namespace {

NoiseParams noise(double s1, double s2) {
  NoiseParams n;
  n.sigma1 = s1;
  n.sigma2 = s2;
  return n;
}

// One estimator update from an exact state with the reset coin forced to 0.
// Returns nullopt if 64 coin seeds all came up fresh.
std::optional<Vec> path_update(StochasticOracle& o, const Vec& x_prev, const Vec& x, const RvrConfig& cfg,
                               uint64_t seed, RvrCallInfo* info) {
  for (uint64_t k = 0; k < 64; ++k) {
    CounterRng coin(derive_seed(seed, "coin", {k}));
    if (coin.bernoulli(cfg.reset_prob)) continue;
    CounterRng replay(derive_seed(seed, "coin", {k}));
    EstimatorState st;
    st.x_prev = x_prev;
    st.g_prev = o.objective().gradient(x_prev);
    return rvr_estimate(st, x, cfg, o, replay, info);
  }
  return std::nullopt;
}

// The Lambda-sum instance used for trajectory checks: one coordinate starts
// near its local maximum, the rest on the flanks.
ProblemInstance trajectory_instance(double s1, double s2) {
  Vec c = Vec::Constant(20, 2.5);
  c[0] = 0.8;
  return make_lambda_sum_instance(c, noise(s1, s2));
}

}  // namespace

PropertyResult rvr_arithmetic() {
  const RvrConfig a{0.1, 0.5, 1.0, 1.0, 1.0};
  const RvrConfig b{0.1, 1.0, 0.1, 1.0, 1.0};
  double err = 0.0;
  err = std::max(err, std::fabs(double(a.path_steps(0.1)) - 11.0));
  err = std::max(err, std::fabs(double(a.fresh_batch()) - 500.0));
  err = std::max(err, std::fabs(expected_query_budget(a, 0.1) - 319.2) / 319.2);
  err = std::max(err, std::fabs(expected_query_budget(b, 0.0) - 12.0) / 12.0);
  err = std::max(err, std::fabs(double(a.path_steps(0.0))));
  const RvrConfig z{0.1, 1.0, 0.0, 0.0, 1.0};
  err = std::max(err, std::fabs(double(z.fresh_batch()) - 1.0));
  return at_most("rvr_arithmetic", err, 1e-12, "K=11, n=500, budgets 319.2 and 12");
}

PropertyResult rvr_empty_path(uint64_t seed) {
  auto inst = make_lambda_sum_instance(Vec::Zero(3), noise(1.0, 1.0));
  auto o = inst.make_oracle(seed);
  const Vec x = Vec::Constant(3, 0.4), gp = Vec::Constant(3, 7.0);
  const RvrConfig cfg{0.1, 1e-12, 1.0, 1.0, LambdaSum::kL2};
  EstimatorState st;
  st.x_prev = x;
  st.g_prev = gp;
  CounterRng coin(seed);
  RvrCallInfo info;
  const Vec g = rvr_estimate(st, x, cfg, *o, coin, &info);
  const bool ok = !info.fresh && info.path_steps == 0 && o->ledger().total() == 0 && g == gp;
  return at_most("rvr_empty_path", ok ? 0.0 : 1.0, 0.0, "K = 0, g unchanged, zero queries");
}

PropertyResult rvr_exact_on_quadratic(uint64_t seed) {
  CounterRng r(derive_seed(seed, "quad"));
  const Mat A = detail::random_symmetric(r, 5);
  auto inst = make_quadratic_instance(A + 8 * Mat::Identity(5, 5), r.normal_vector(5), noise(0.0, 0.0));
  auto o = inst.make_oracle(seed);
  const RvrConfig cfg{0.1, 0.5, 1.0, 1.0, 1.0};  // declared noise only sets K
  double worst = 0.0;
  for (int k = 0; k < 50; ++k) {
    const Vec xp = r.normal_vector(5), x = xp + 0.3 * r.normal_vector(5);
    auto g = path_update(*o, xp, x, cfg, derive_seed(seed, "trial", {uint64_t(k)}), nullptr);
    if (!g) throw ContractError("coin never came up 0");
    const Vec ex = inst.objective->gradient(x);
    worst = std::max(worst, (*g - ex).norm() / std::max(1.0, ex.norm()));
  }
  return at_most("rvr_exact_on_quadratic", worst, 1e-12);
}

PropertyResult rvr_fresh_variance(int reps, uint64_t seed) {
  const double eps = 0.2, s1 = 1.0;
  auto inst = make_lambda_sum_instance(Vec::Zero(5), noise(s1, 0.0));
  const RvrConfig cfg{eps, 1.0, s1, 0.0, LambdaSum::kL2};
  CounterRng r(derive_seed(seed, "probe"));
  const Vec x = detail::uniform_box(r, 5, -2, 2);
  const Vec ex = inst.objective->gradient(x);
  auto o = inst.make_oracle(seed);
  CounterRng coin(derive_seed(seed, "algorithm"));
  Vec mean = Vec::Zero(5);
  double sq = 0.0;
  for (int k = 0; k < reps; ++k) {
    EstimatorState st;
    const Vec g = rvr_estimate(st, x, cfg, *o, coin);
    mean += g;
    sq += (g - ex).squaredNorm();
  }
  mean /= reps;
  const double n = double(cfg.fresh_batch());
  const double var_bound = s1 * s1 / n;
  PropertyResult res = at_most("rvr_fresh_variance", sq / reps, var_bound * 1.1,
                               fmt("bias norm ", (mean - ex).norm()));
  res.passed = res.passed && (mean - ex).norm() <= 3.0 * std::sqrt(var_bound / reps);
  return res;
}

PropertyResult rvr_path_bias(uint64_t seed) {
  const double eps = 0.1, b = 0.5, dx = 0.1, l2 = 1.0;
  auto f = std::make_shared<CubicCoordinate>(3, l2, 0.5);
  ProblemInstance inst{f, Regularity{1.0, 10.0, l2}, noise(0.0, 0.0), {}};
  auto o = inst.make_oracle(seed);
  const RvrConfig cfg{eps, b, 1.0, 1.0, l2};
  CounterRng r(derive_seed(seed, "probe"));
  double worst_ratio = 0.0, taylor = 0.0;
  for (int k = 0; k < 200; ++k) {
    const Vec xp = detail::uniform_box(r, 3, -2, 2);
    const Vec x = xp + dx * r.unit_vector(3);
    RvrCallInfo info;
    auto g = path_update(*o, xp, x, cfg, derive_seed(seed, "trial", {uint64_t(k)}), &info);
    if (!g) throw ContractError("coin never came up 0");
    const double K = double(info.path_steps);
    taylor = K * (l2 / 2.0) * (dx / K) * (dx / K);
    worst_ratio = std::max(worst_ratio, (*g - f->gradient(x)).norm() / taylor);
  }
  PropertyResult res = at_most("rvr_path_bias", worst_ratio, 1.0,
                               fmt("Taylor bound ", taylor, " vs b eps/50 = ", b * eps / 50.0));
  res.passed = res.passed && taylor <= b * eps / 50.0;
  return res;
}

PropertyResult rvr_path_variance(int reps, uint64_t seed) {
  const double eps = 0.1, b = 0.5, dx = 0.1, s2 = 1.0;
  auto inst = make_quadratic_instance(Mat::Identity(4, 4), Vec::Zero(4), noise(0.0, s2));
  const RvrConfig cfg{eps, b, 1.0, s2, 1.0};
  CounterRng r(derive_seed(seed, "probe"));
  const Vec xp = r.normal_vector(4), x = xp + dx * r.unit_vector(4);
  double acc = 0.0;
  uint64_t K = 0;
  for (int k = 0; k < reps; ++k) {
    auto o = inst.make_oracle(derive_seed(seed, "oracle", {uint64_t(k)}));
    RvrCallInfo info;
    auto g = path_update(*o, xp, x, cfg, derive_seed(seed, "trial", {uint64_t(k)}), &info);
    if (!g) throw ContractError("coin never came up 0");
    K = info.path_steps;
    acc += (*g - x).squaredNorm();
  }
  const double bound = s2 * s2 * dx * dx / double(K);
  PropertyResult res = at_most("rvr_path_variance", acc / reps, bound, fmt("K = ", K));
  res.passed = res.passed && bound <= b * eps * eps / 5.0;
  return res;
}

PropertyResult rvr_query_determinism(uint64_t seed) {
  auto inst = trajectory_instance(1.0, 1.0);
  const RvrConfig cfg{0.3, 0.2, 1.0, 1.0, LambdaSum::kL2};
  auto trace = [&] {
    auto o = inst.make_oracle(seed);
    CounterRng coin(derive_seed(seed, "algorithm"));
    EstimatorState st;
    Vec x = Vec::Zero(20);
    std::vector<QueryLedger> seq;
    for (int t = 0; t < 100; ++t) {
      x -= 0.05 * rvr_estimate(st, x, cfg, *o, coin);
      seq.push_back(o->ledger());
    }
    return std::make_pair(seq, x);
  };
  const auto a = trace(), b = trace();
  const bool same = a.first == b.first && a.second == b.second;
  return at_most("rvr_query_determinism", same ? 0.0 : 1.0, 0.0);
}

PropertyResult rvr_query_budget(int calls, uint64_t seed) {
  struct Point {
    double s1, s2, l2, eps, b, dx;
  };
  const Point pts[] = {{1.0, 1.0, 1.0, 0.1, 0.5, 0.1}, {0.1, 1.0, 1.0, 0.1, 1.0, 0.0}, {2.0, 0.5, 2.0, 0.2, 0.2, 0.05}};
  double worst = 0.0;
  std::string detail;
  int idx = 0;
  for (const Point& p : pts) {
    auto inst = make_lambda_sum_instance(Vec::Zero(3), noise(p.s1, p.s2));
    auto o = inst.make_oracle(derive_seed(seed, "oracle", {uint64_t(idx)}));
    CounterRng coin(derive_seed(seed, "algorithm", {uint64_t(idx)}));
    const RvrConfig cfg{p.eps, p.b, p.s1, p.s2, p.l2};
    EstimatorState st;
    Vec x = Vec::Zero(3), step = Vec::Zero(3);
    step[0] = p.dx;
    // The first call has no state and is excluded from the average.
    rvr_estimate(st, x, cfg, *o, coin);
    const uint64_t before = o->ledger().total();
    for (int k = 0; k < calls; ++k) {
      x += step;
      rvr_estimate(st, x, cfg, *o, coin);
    }
    const double mean = double(o->ledger().total() - before) / calls;
    const double bound = expected_query_budget(cfg, p.dx);
    worst = std::max(worst, mean / bound);
    detail += fmt("[", mean, " <= ", bound, "] ");
    ++idx;
  }
  return at_most("rvr_query_budget", worst, 1.0, detail);
}

PropertyResult rvr_error_along_trajectory(int steps, int reps, uint64_t seed) {
  const double eps = 0.1;
  auto inst = trajectory_instance(1.0, 1.0);
  SolverParams sp;
  sp.epsilon = eps;
  const SgdHvpRvrParams p = sgd_hvp_rvr_params(inst.regularity, inst.noise, sp);
  const RvrConfig cfg{eps, p.b, 1.0, 1.0, inst.regularity.l2};
  const double eta = p.eta;
  const ErrorSuiteResult r = estimator_error_suite(
      inst, Vec::Zero(20), [eta](const Vec& x, const Vec& g) { Vec y = x - eta * g; return y; }, cfg, steps, reps,
      seed);
  return at_most("rvr_error_along_trajectory", r.overall_mean, 1.2 * eps * eps,
                 fmt("stderr ", r.overall_stderr, ", max step mean ", r.max_step_mean, ", b ", p.b));
}

PropertyResult rvr_fresh_only_error(int steps, int reps, uint64_t seed) {
  const double eps = 0.1;
  auto inst = trajectory_instance(1.0, 1.0);
  const RvrConfig cfg{eps, 1.0, 1.0, 1.0, inst.regularity.l2};
  const ErrorSuiteResult r = estimator_error_suite(
      inst, Vec::Zero(20), [](const Vec& x, const Vec& g) { Vec y = x - 0.05 * g; return y; }, cfg, steps, reps,
      seed);
  const double bound = 1.0 / double(cfg.fresh_batch());
  PropertyResult res = at_most("rvr_fresh_only_error", r.overall_mean, bound * 1.1,
                               fmt("sigma1^2/n = ", bound, ", eps^2/5 = ", eps * eps / 5));
  res.passed = res.passed && bound <= eps * eps / 5.0;
  return res;
}

}  // namespace sosp::props
