#include "sosp/solvers.hpp"

#include <cmath>

#include "sosp/cubic.hpp"
#include "sosp/curvature.hpp"
#include "sosp/errors.hpp"
#include "sosp/linalg.hpp"
#include "sosp/numeric.hpp"
#include "sosp/rvr.hpp"

namespace sosp {

std::string to_string(Algorithm a) {
  switch (a) {
    case Algorithm::sgd: return "sgd";
    case Algorithm::sgd_hvp_rvr: return "sgd_hvp_rvr";
    case Algorithm::cubic_rvr: return "cubic_rvr";
    case Algorithm::sosp_hvp: return "sosp_hvp";
    case Algorithm::sosp_cubic: return "sosp_cubic";
  }
  return "?";
}

Algorithm algorithm_from_string(const std::string& s) {
  for (Algorithm a : {Algorithm::sgd, Algorithm::sgd_hvp_rvr, Algorithm::cubic_rvr, Algorithm::sosp_hvp,
                      Algorithm::sosp_cubic})
    if (to_string(a) == s) return a;
  throw ConfigError("unknown algorithm: " + s);
}

bool Overrides::any() const {
  return eta || b || M || p || b_g || b_H || delta || T || n_H || n1 || n2;
}

namespace {

constexpr double kMaxHorizon = 1e12;

uint64_t to_count(double v, const char* what) {
  if (!(v <= kMaxHorizon)) throw ConfigError(std::string(what) + " exceeds 1e12");
  return uint64_t(std::max(0.0, v));
}

// min{1, num / sigma1} with the sigma1 = 0 convention b = 1.
double reset_rate(double num, double sigma1) { return sigma1 > 0.0 ? std::min(1.0, num / sigma1) : 1.0; }

// sigma2^2 eps log d / sigma1^2, or 0 when sigma1 = 0.
double noise_ratio(double s2, double eps, double logd, double s1) {
  return s1 > 0.0 ? s2 * s2 * eps * logd / (s1 * s1) : 0.0;
}

void require_finite_l1(const Regularity& r, const char* who) {
  if (!std::isfinite(r.l1)) throw ConfigError(std::string(who) + ": needs a finite L1");
}

double need_gamma(const SolverParams& sp, const char* who) {
  if (!sp.gamma || !(*sp.gamma > 0.0)) throw ConfigError(std::string(who) + ": gamma must be given and > 0");
  return *sp.gamma;
}

void check_eps(const SolverParams& sp) {
  if (!(sp.epsilon > 0.0)) throw ConfigError("solver: epsilon must be > 0");
}

}  // namespace

SgdParams sgd_theory_params(const Regularity& r, const NoiseParams& n, double eps) {
  require_finite_l1(r, "sgd");
  SgdParams p;
  p.eta = 1.0 / (2.0 * r.l1);
  if (n.sigma1 > 0.0) p.eta = std::min(p.eta, eps * eps / (2.0 * r.l1 * n.sigma1 * n.sigma1));
  p.T = to_count(ceil_tol(4.0 * r.delta / (p.eta * eps * eps)), "sgd horizon");
  return p;
}

SgdHvpRvrParams sgd_hvp_rvr_params(const Regularity& r, const NoiseParams& n, const SolverParams& sp) {
  check_eps(sp);
  require_finite_l1(r, "sgd_hvp_rvr");
  const double e = sp.epsilon, s2 = n.sigma2;
  SgdHvpRvrParams p;
  p.eta = 1.0 / (2.0 * std::sqrt(r.l1 * r.l1 + s2 * s2 + e * r.l2));
  p.T = to_count(ceil_tol(2.0 * r.delta / (p.eta * e * e)), "horizon");
  p.b = reset_rate(p.eta * e * std::sqrt(s2 * s2 + e * r.l2), n.sigma1);
  const Overrides& o = sp.overrides;
  if (o.eta) p.eta = *o.eta;
  if (o.T) p.T = *o.T;
  if (o.b) p.b = *o.b;
  return p;
}

CubicRvrParams cubic_rvr_params(const Regularity& r, const NoiseParams& n, int dim, const SolverParams& sp) {
  check_eps(sp);
  const double e = sp.epsilon, s1 = n.sigma1, s2 = n.sigma2, lg = log_dim(dim);
  CubicRvrParams p;
  p.M = 5.0 * std::max(r.l2, noise_ratio(s2, e, lg, s1));
  p.eta = 25.0 * std::sqrt(e / p.M);
  p.T = to_count(ceil_tol(5.0 * r.delta / (3.0 * p.eta * e)), "horizon");
  p.n_H = std::max<uint64_t>(1, to_count(ceil_tol(22.0 * s2 * s2 * p.eta * p.eta * lg / (e * e)), "n_H"));
  p.b = reset_rate(p.eta * std::sqrt(s2 * s2 + e * r.l2) / 25.0, s1);
  const Overrides& o = sp.overrides;
  if (o.M) p.M = *o.M;
  if (o.eta) p.eta = *o.eta;
  if (o.T) p.T = *o.T;
  if (o.n_H) p.n_H = *o.n_H;
  if (o.b) p.b = *o.b;
  return p;
}

SospHvpParams sosp_hvp_params(const Regularity& r, const NoiseParams& n, double sb, const SolverParams& sp) {
  check_eps(sp);
  require_finite_l1(r, "sosp_hvp");
  const double e = sp.epsilon, g = need_gamma(sp, "sosp_hvp"), L2 = r.l2, D = r.delta;
  SospHvpParams p;
  p.sigma2_bar = sb;
  p.eta = std::min(g / (e * L2), 1.0 / (2.0 * std::sqrt(r.l1 * r.l1 + sb * sb + e * L2)));
  p.T = to_count(ceil_tol(20.0 * D * L2 * L2 / (g * g * g) + 2.0 * D / (p.eta * e * e)), "horizon");
  p.p = g * g * g / (g * g * g + 10.0 * D * L2 * L2 * p.eta * e * e);
  p.b_g = reset_rate(p.eta * e * std::sqrt(sb * sb + e * L2), n.sigma1);
  p.b_H = reset_rate(g * std::sqrt(sb * sb + e * L2) / L2, n.sigma1);
  p.delta = std::min(g / (1600.0 * L2), g / (1600.0 * r.l1));
  const Overrides& o = sp.overrides;
  if (o.eta) p.eta = *o.eta;
  if (o.T) p.T = *o.T;
  if (o.p) p.p = *o.p;
  if (o.b_g) p.b_g = *o.b_g;
  if (o.b_H) p.b_H = *o.b_H;
  if (o.delta) p.delta = *o.delta;
  return p;
}

SospCubicParams sosp_cubic_params(const Regularity& r, const NoiseParams& n, int dim, const SolverParams& sp) {
  check_eps(sp);
  const double e = sp.epsilon, g = need_gamma(sp, "sosp_cubic"), L2 = r.l2, D = r.delta;
  const double s1 = n.sigma1, s2 = n.sigma2, lg = log_dim(dim);
  SospCubicParams p;
  p.M = 4.0 * std::max(L2, noise_ratio(s2, e, lg, s1));
  p.eta = 30.0 * std::sqrt(e / p.M);
  const double e32 = std::pow(e, 1.5), g32 = std::pow(g, 1.5), sM = std::sqrt(p.M);
  p.T = to_count(ceil_tol(18.0 * D * L2 * L2 / (g * g * g) + D * sM / (30.0 * e32)), "horizon");
  p.p = sM * g32 / (sM * g32 + 540.0 * L2 * L2 * e32);
  p.n1 = std::max<uint64_t>(1, to_count(ceil_tol(2e4 * s2 * s2 * lg / (e * p.M)), "n1"));
  p.n2 = std::max<uint64_t>(1, to_count(ceil_tol(440.0 * s2 * s2 * lg / (g * g)), "n2"));
  p.b_g = reset_rate(p.eta * std::sqrt(s2 * s2 + e * L2) / 30.0, s1);
  p.b_H = reset_rate(g * std::sqrt(s2 * s2 + e * L2) / L2, s1);
  const Overrides& o = sp.overrides;
  if (o.M) p.M = *o.M;
  if (o.eta) p.eta = *o.eta;
  if (o.T) p.T = *o.T;
  if (o.p) p.p = *o.p;
  if (o.n1) p.n1 = *o.n1;
  if (o.n2) p.n2 = *o.n2;
  if (o.b_g) p.b_g = *o.b_g;
  if (o.b_H) p.b_H = *o.b_H;
  return p;
}

// ---------------------------------------------------------------- cost model

namespace {

// Expected estimator queries per call for a step of length dx (no factor 6).
double rvr_cost(const NoiseParams& n, double l2, double eps, double b, double dx) {
  const RvrConfig c{eps, b, n.sigma1, n.sigma2, l2};
  return expected_query_budget(c, dx) / 6.0;
}

double sigma2_bar_of(const ProblemInstance& inst) {
  if (inst.noise.sigma2_as) return *inst.noise.sigma2_as;
  if (inst.noise.law == NoiseLaw::rank_one || inst.noise.sigma2 == 0.0) return inst.noise.sigma2;
  throw ContractError("sosp_hvp: oracle has no almost-sure Hessian noise bound");
}

}  // namespace

double expected_cost(Algorithm a, const ProblemInstance& inst, const SolverParams& sp) {
  const Regularity& r = inst.regularity;
  const NoiseParams& n = inst.noise;
  const double e = sp.epsilon;
  switch (a) {
    case Algorithm::sgd: {
      SgdParams p = sgd_theory_params(r, n, e);
      if (sp.overrides.T) p.T = *sp.overrides.T;
      return double(p.T);
    }
    case Algorithm::sgd_hvp_rvr: {
      const SgdHvpRvrParams p = sgd_hvp_rvr_params(r, n, sp);
      return double(p.T) * rvr_cost(n, r.l2, e, p.b, p.eta * e);
    }
    case Algorithm::cubic_rvr: {
      const CubicRvrParams p = cubic_rvr_params(r, n, inst.dim(), sp);
      return double(p.T) * (double(p.n_H) + rvr_cost(n, r.l2, e, p.b, std::sqrt(e / p.M)));
    }
    case Algorithm::sosp_hvp: {
      const SospHvpParams p = sosp_hvp_params(r, n, sigma2_bar_of(inst), sp);
      const OjaBudget ob = oja_budget(inst.dim(), *sp.gamma, p.delta, r.l1, p.sigma2_bar);
      const double grad_step = rvr_cost(n, r.l2, e, p.b_g, p.eta * e);
      const double curv_step = double(ob.iterations + ob.verification_samples);
      return double(p.T) * (p.p * grad_step + (1.0 - p.p) * curv_step);
    }
    case Algorithm::sosp_cubic: {
      const SospCubicParams p = sosp_cubic_params(r, n, inst.dim(), sp);
      const double cub = double(p.n1) + rvr_cost(n, r.l2, e, p.b_g, std::sqrt(e / p.M));
      return double(p.T) * (p.p * cub + (1.0 - p.p) * double(p.n2));
    }
  }
  return 0.0;
}

// ---------------------------------------------------------------- runs

namespace {

// Output selection, first passage and trajectory retention.
class Tracker {
 public:
  Tracker(const ProblemInstance& inst, const StochasticOracle& oracle, const SolverParams& sp, RunResult& res,
          uint64_t first, uint64_t last, uint64_t seed)
      : f_(*inst.objective), oracle_(oracle), sp_(sp), res_(res), first_(first), last_(last) {
    CounterRng out(derive_seed(seed, "output"));
    res_.output_index = last >= first ? first + out.below(last - first + 1) : first;
    const uint64_t span = last >= first ? last - first + 1 : 1;
    const uint64_t keep = std::max(1, sp.keep_iterates);
    stride_ = (span + keep - 1) / keep;
    threshold_ = sp.success_threshold > 0.0 ? sp.success_threshold : sp.epsilon;
  }

  // Returns true when the run may stop early.
  bool visit(uint64_t idx, const Vec& x) {
    if (idx < first_ || idx > last_) return false;
    if (idx == res_.output_index) {
      res_.output = x;
      have_output_ = true;
    }
    if ((idx - first_) % stride_ == 0) {
      res_.iterates.push_back(x);
      res_.iterate_index.push_back(idx);
    }
    if (!res_.first_passage_step && f_.gradient(x).norm() <= threshold_) {
      res_.first_passage_step = idx;
      res_.first_passage_queries = oracle_.ledger().total();
      if (sp_.stop_at_first_passage) {
        if (!have_output_) {
          res_.output = x;
          res_.output_index = idx;
          res_.notes.push_back("stopped at first passage; output is the first-passage iterate");
        }
        return true;
      }
    }
    return false;
  }

 private:
  const Objective& f_;
  const StochasticOracle& oracle_;
  const SolverParams& sp_;
  RunResult& res_;
  uint64_t first_, last_, stride_ = 1;
  double threshold_ = 0.0;
  bool have_output_ = false;
};

void finalize(RunResult& res, const ProblemInstance& inst, const StochasticOracle& oracle) {
  res.ledger = oracle.ledger();
  res.substreams = oracle.substreams_consumed();
  res.grad_norm_exact = inst.objective->gradient(res.output).norm();
  res.lambda_min_exact = lambda_min_exact(*inst.objective, res.output);
}

Vec start_point(const ProblemInstance& inst, const SolverParams& sp) {
  if (!sp.x0) return Vec::Zero(inst.dim());
  if (sp.x0->size() != inst.dim()) throw ConfigError("solver: x0 has wrong dimension");
  return *sp.x0;
}

std::unique_ptr<StochasticOracle> prepare(Algorithm a, const ProblemInstance& inst, const SolverParams& sp,
                                          uint64_t seed, RunResult& res) {
  const double need = expected_cost(a, inst, sp);
  res.params["expected_queries"] = need;
  if (need > double(sp.query_cap))
    throw BudgetError(to_string(a) + ": expected queries exceed the cap", need, double(sp.query_cap));
  auto oracle = inst.make_oracle(derive_seed(seed, "oracle"));
  oracle->set_query_cap(sp.query_cap);
  res.algorithm = to_string(a);
  res.seed = seed;
  res.tuned = sp.overrides.any();
  return oracle;
}

RvrConfig rvr_config(const ProblemInstance& inst, double eps, double b) {
  return RvrConfig{eps, b, inst.noise.sigma1, inst.noise.sigma2, inst.regularity.l2};
}

Mat mean_hessian(StochasticOracle& o, const Vec& x, uint64_t n) {
  Mat H = Mat::Zero(x.size(), x.size());
  for (uint64_t j = 0; j < n; ++j) H += o.query_hess(x);
  return H / double(n);
}

}  // namespace

RunResult sgd_baseline(const ProblemInstance& inst, double epsilon, double eta, uint64_t horizon, uint64_t seed,
                       const SolverParams& sp_in) {
  SolverParams sp = sp_in;
  sp.epsilon = epsilon;
  sp.overrides.T = horizon;
  if (!(eta > 0.0)) throw ConfigError("sgd: step size must be > 0");
  if (std::isfinite(inst.regularity.l1) && eta > 1.0 / (2.0 * inst.regularity.l1) * (1.0 + 1e-12))
    throw ConfigError("sgd: step size must be <= 1/(2 L1)");
  RunResult res;
  auto oracle = prepare(Algorithm::sgd, inst, sp, seed, res);
  res.params["eta"] = eta;
  res.params["T"] = double(horizon);
  res.horizon = horizon;
  Vec x = start_point(inst, sp);
  if (horizon == 0) {
    res.output = x;
    res.output_index = 0;
    finalize(res, inst, *oracle);
    return res;
  }
  Tracker tr(inst, *oracle, sp, res, 1, horizon, seed);
  for (uint64_t t = 1; t <= horizon; ++t) {
    if (tr.visit(t, x)) break;
    x -= eta * oracle->query_grad(x);
  }
  finalize(res, inst, *oracle);
  return res;
}

RunResult sgd_hvp_rvr(const ProblemInstance& inst, const SolverParams& sp, uint64_t seed) {
  RunResult res;
  const SgdHvpRvrParams p = sgd_hvp_rvr_params(inst.regularity, inst.noise, sp);
  auto oracle = prepare(Algorithm::sgd_hvp_rvr, inst, sp, seed, res);
  res.params = {{"eta", p.eta}, {"T", double(p.T)}, {"b", p.b}, {"expected_queries", res.params["expected_queries"]}};
  const uint64_t T = std::max<uint64_t>(1, p.T);
  res.horizon = T;
  const double e = sp.epsilon;
  if (inst.noise.sigma1 >= e || e >= std::sqrt(inst.regularity.delta * inst.regularity.l1))
    res.notes.push_back("outside the theorem regime eps < min{sigma1, sqrt(Delta L1)}");
  CounterRng alg(derive_seed(seed, "algorithm"));
  const RvrConfig cfg = rvr_config(inst, e, p.b);
  EstimatorState st;
  Vec x = start_point(inst, sp);
  Tracker tr(inst, *oracle, sp, res, 1, T, seed);
  double resets = 0.0;
  for (uint64_t t = 1; t <= T; ++t) {
    if (tr.visit(t, x)) break;
    RvrCallInfo info;
    const Vec g = rvr_estimate(st, x, cfg, *oracle, alg, &info);
    resets += info.fresh;
    x -= p.eta * g;
  }
  res.counters["fresh_starts"] = resets;
  finalize(res, inst, *oracle);
  return res;
}

RunResult cubic_rvr(const ProblemInstance& inst, const SolverParams& sp, uint64_t seed) {
  RunResult res;
  const CubicRvrParams p = cubic_rvr_params(inst.regularity, inst.noise, inst.dim(), sp);
  auto oracle = prepare(Algorithm::cubic_rvr, inst, sp, seed, res);
  res.params = {{"M", p.M},     {"eta", p.eta}, {"T", double(p.T)}, {"n_H", double(p.n_H)},
                {"b", p.b},     {"expected_queries", res.params["expected_queries"]}};
  const uint64_t T = std::max<uint64_t>(1, p.T);
  res.horizon = T;
  if (inst.noise.sigma1 <= sp.epsilon) res.notes.push_back("outside the theorem regime eps < sigma1");
  CounterRng alg(derive_seed(seed, "algorithm"));
  const RvrConfig cfg = rvr_config(inst, sp.epsilon, p.b);
  EstimatorState st;
  Vec x = start_point(inst, sp);
  const bool tri = inst.objective->tridiagonal();
  Tracker tr(inst, *oracle, sp, res, 2, T + 1, seed);
  double unconverged = 0.0;
  for (uint64_t t = 1; t <= T; ++t) {
    const Mat H = mean_hessian(*oracle, x, p.n_H);
    const Vec g = rvr_estimate(st, x, cfg, *oracle, alg);
    const CubicSolution s = solve_cubic_tr({g, H, p.M, p.eta}, 1e-10, tri);
    unconverged += !s.converged;
    x += s.s;
    if (tr.visit(t + 1, x)) break;
  }
  res.counters["cubic_unconverged"] = unconverged;
  finalize(res, inst, *oracle);
  return res;
}

RunResult sosp_hvp(const ProblemInstance& inst, const SolverParams& sp, uint64_t seed) {
  RunResult res;
  auto oracle_probe = inst.make_oracle(0);
  const std::optional<double> sb = oracle_probe->hessian_noise_bound();
  if (!sb) throw ContractError("sosp_hvp: oracle has no almost-sure Hessian noise bound");
  const SospHvpParams p = sosp_hvp_params(inst.regularity, inst.noise, *sb, sp);
  auto oracle = prepare(Algorithm::sosp_hvp, inst, sp, seed, res);
  const double g = *sp.gamma;
  res.params = {{"eta", p.eta}, {"T", double(p.T)},  {"p", p.p},         {"b_g", p.b_g},
                {"b_H", p.b_H}, {"delta", p.delta}, {"sigma2_bar", *sb}, {"expected_queries", res.params["expected_queries"]}};
  const uint64_t T = std::max<uint64_t>(1, p.T);
  res.horizon = T;
  CounterRng alg(derive_seed(seed, "algorithm"));
  EstimatorState st;
  Vec x = start_point(inst, sp);
  const double e = sp.epsilon, L2 = inst.regularity.l2;
  // x0 = x1, so the first call is a fresh start.
  Vec gt = rvr_estimate(st, x, rvr_config(inst, e, p.b_g), *oracle, alg);
  Tracker tr(inst, *oracle, sp, res, 1, T, seed);
  double grad_steps = 0, oja_calls = 0, certs = 0;
  for (uint64_t t = 1; t <= T; ++t) {
    if (tr.visit(t, x)) break;
    if (alg.bernoulli(p.p)) {
      ++grad_steps;
      const Vec xn = x - p.eta * gt;
      gt = rvr_estimate(st, xn, rvr_config(inst, e, p.b_g), *oracle, alg);
      x = xn;
    } else {
      ++oja_calls;
      const CurvatureCertificate c = oja_search(*oracle, x, g, p.delta, alg);
      if (c.direction) {
        ++certs;
        const Vec xn = curvature_step(x, *c.direction, g, L2, alg);
        gt = rvr_estimate(st, xn, rvr_config(inst, e, p.b_H), *oracle, alg);
        x = xn;
      }
    }
  }
  res.counters["gradient_steps"] = grad_steps;
  res.counters["oja_calls"] = oja_calls;
  res.counters["certificates"] = certs;
  finalize(res, inst, *oracle);
  return res;
}

RunResult sosp_cubic(const ProblemInstance& inst, const SolverParams& sp, uint64_t seed) {
  RunResult res;
  const SospCubicParams p = sosp_cubic_params(inst.regularity, inst.noise, inst.dim(), sp);
  auto oracle = prepare(Algorithm::sosp_cubic, inst, sp, seed, res);
  const double g = *sp.gamma;
  res.params = {{"M", p.M},       {"eta", p.eta},         {"T", double(p.T)}, {"p", p.p},
                {"n1", double(p.n1)}, {"n2", double(p.n2)}, {"b_g", p.b_g},     {"b_H", p.b_H},
                {"expected_queries", res.params["expected_queries"]}};
  const uint64_t T = std::max<uint64_t>(2, p.T);
  res.horizon = T;
  CounterRng alg(derive_seed(seed, "algorithm"));
  EstimatorState st;
  Vec x = start_point(inst, sp);
  const double e = sp.epsilon, L2 = inst.regularity.l2;
  const bool tri = inst.objective->tridiagonal();
  Vec gt = rvr_estimate(st, x, rvr_config(inst, e, p.b_g), *oracle, alg);
  Tracker tr(inst, *oracle, sp, res, 1, T - 1, seed);
  double cubic_steps = 0, curv_checks = 0, curv_steps = 0;
  for (uint64_t t = 1; t <= T; ++t) {
    if (tr.visit(t, x)) break;
    if (t == T) break;  // x_{T+1} is never a candidate output
    if (alg.bernoulli(p.p)) {
      ++cubic_steps;
      const Mat H = mean_hessian(*oracle, x, p.n1);
      const CubicSolution s = solve_cubic_tr({gt, H, p.M, p.eta}, 1e-10, tri);
      const Vec xn = x + s.s;
      gt = rvr_estimate(st, xn, rvr_config(inst, e, p.b_g), *oracle, alg);
      x = xn;
    } else {
      ++curv_checks;
      const Mat H = mean_hessian(*oracle, x, p.n2);
      const std::optional<Vec> u = exact_curvature_direction(H, g, tri);
      if (u) {
        ++curv_steps;
        const Vec xn = curvature_step(x, *u, g, L2, alg);
        gt = rvr_estimate(st, xn, rvr_config(inst, e, p.b_H), *oracle, alg);
        x = xn;
      }
    }
  }
  res.counters["cubic_steps"] = cubic_steps;
  res.counters["curvature_checks"] = curv_checks;
  res.counters["curvature_steps"] = curv_steps;
  finalize(res, inst, *oracle);
  return res;
}

RunResult run_algorithm(Algorithm a, const ProblemInstance& inst, const SolverParams& sp, uint64_t seed) {
  switch (a) {
    case Algorithm::sgd: {
      SgdParams p = sgd_theory_params(inst.regularity, inst.noise, sp.epsilon);
      if (sp.overrides.eta) p.eta = *sp.overrides.eta;
      if (sp.overrides.T) p.T = *sp.overrides.T;
      RunResult r = sgd_baseline(inst, sp.epsilon, p.eta, p.T, seed, sp);
      r.tuned = sp.overrides.any();
      return r;
    }
    case Algorithm::sgd_hvp_rvr: return sgd_hvp_rvr(inst, sp, seed);
    case Algorithm::cubic_rvr: return cubic_rvr(inst, sp, seed);
    case Algorithm::sosp_hvp: return sosp_hvp(inst, sp, seed);
    case Algorithm::sosp_cubic: return sosp_cubic(inst, sp, seed);
  }
  throw ConfigError("unknown algorithm");
}

}  // namespace sosp
