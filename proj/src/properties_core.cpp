#include <cmath>

#include "property_util.hpp"
#include "sosp/errors.hpp"
#include "sosp/linalg.hpp"
#include "sosp/mss.hpp"
#include "sosp/problems.hpp"
#include "sosp/chain.hpp"
#include "sosp/solvers.hpp"

namespace sosp {

PropertyResult at_most(std::string name, double value, double bound, std::string detail) {
  PropertyResult r;
  r.name = std::move(name);
  r.value = value;
  r.bound = bound;
  r.margin = bound - value;
  r.passed = value <= bound;
  r.detail = std::move(detail);
  return r;
}

PropertyResult at_least(std::string name, double value, double bound, std::string detail) {
  PropertyResult r;
  r.name = std::move(name);
  r.value = value;
  r.bound = bound;
  r.margin = value - bound;
  r.passed = value >= bound;
  r.detail = std::move(detail);
  return r;
}

namespace props {

using detail::fmt;

namespace {

NoiseParams noise(double s1, double s2, int points = 1) {
  NoiseParams n;
  n.sigma1 = s1;
  n.sigma2 = s2;
  n.query_points = points;
  return n;
}

ProblemInstance small_lambda_sum(int d, double s1, double s2) {
  Vec c = Vec::Constant(d, 0.5);
  return make_lambda_sum_instance(c, noise(s1, s2));
}

}  // namespace

PropertyResult gradient_unbiased(double sigma1, int draws, uint64_t seed) {
  auto inst = small_lambda_sum(5, sigma1, 0.0);
  CounterRng r(derive_seed(seed, "probe"));
  const Vec x = detail::uniform_box(r, 5, -2, 2);
  auto o = inst.make_oracle(seed);
  Vec mean = Vec::Zero(5);
  for (int k = 0; k < draws; ++k) mean += o->query_grad(x);
  mean /= draws;
  const double err = (mean - inst.objective->gradient(x)).norm();
  return at_most("gradient_unbiased", err, 3.0 * sigma1 / std::sqrt(double(draws)));
}

PropertyResult gradient_noise_norm(double sigma1, int draws, uint64_t seed) {
  auto inst = small_lambda_sum(5, sigma1, 0.0);
  auto o = inst.make_oracle(seed);
  CounterRng r(derive_seed(seed, "probe"));
  double worst = 0.0;
  for (int k = 0; k < draws; ++k) {
    const Vec x = detail::uniform_box(r, 5, -2, 2);
    const double n = (o->query_grad(x) - inst.objective->gradient(x)).norm();
    worst = std::max(worst, std::fabs(n - sigma1));
  }
  return at_most("gradient_noise_norm_exact", worst, 1e-12, "max | |noise| - sigma1 |");
}

PropertyResult hvp_unbiased(double sigma2, int draws, uint64_t seed) {
  auto inst = make_quadratic_instance(Mat::Identity(4, 4), Vec::Zero(4), noise(0.0, sigma2));
  auto o = inst.make_oracle(seed);
  CounterRng r(derive_seed(seed, "probe"));
  const Vec x = detail::uniform_box(r, 4, -1, 1);
  const Vec v = r.unit_vector(4);
  Vec mean = Vec::Zero(4);
  for (int k = 0; k < draws; ++k) mean += o->query_hvp(x, v);
  mean /= draws;
  return at_most("hvp_unbiased", (mean - v).norm(), 3.0 * sigma2 / std::sqrt(double(draws)));
}

PropertyResult hvp_noise_norm(double sigma2, int draws, uint64_t seed) {
  auto inst = make_quadratic_instance(Mat::Identity(4, 4), Vec::Zero(4), noise(0.0, sigma2));
  auto o = inst.make_oracle(seed);
  CounterRng r(derive_seed(seed, "probe"));
  const Vec x = Vec::Zero(4);
  double worst = 0.0;
  for (int k = 0; k < draws; ++k) {
    const Vec v = r.unit_vector(4);
    worst = std::max(worst, (o->query_hvp(x, v) - v).norm());
  }
  return at_most("hvp_noise_norm", worst, sigma2 * (1.0 + 1e-12), "max |answer - v| for unit v");
}

PropertyResult hessian_noise_exact(double sigma2, int draws, uint64_t seed) {
  auto inst = small_lambda_sum(6, 0.0, sigma2);
  auto o = inst.make_oracle(seed);
  CounterRng r(derive_seed(seed, "probe"));
  double worst = 0.0;
  bool symmetric = true;
  for (int k = 0; k < draws; ++k) {
    const Vec x = detail::uniform_box(r, 6, -2, 2);
    const Mat H = o->query_hess(x);
    symmetric = symmetric && (H - H.transpose()).cwiseAbs().maxCoeff() == 0.0;
    const Mat E = H - inst.objective->hessian(x);
    const SymEig e = sym_eig(0.5 * (E + E.transpose()));
    const double op = std::max(std::fabs(e.values[0]), std::fabs(e.values[e.values.size() - 1]));
    worst = std::max(worst, std::fabs(op - sigma2));
  }
  PropertyResult res = at_most("hessian_noise_exact", worst, 1e-12 * std::max(1.0, sigma2),
                               symmetric ? "answers exactly symmetric" : "asymmetric answer seen");
  res.passed = res.passed && symmetric;
  return res;
}

PropertyResult hvp_zero_direction(uint64_t seed) {
  auto inst = small_lambda_sum(3, 1.0, 1.0);
  auto o = inst.make_oracle(seed);
  const Vec a = o->query_hvp(Vec::Ones(3), Vec::Zero(3));
  const bool ok = a.isZero(0.0) && o->ledger().hvp == 1 && o->ledger().total() == 1;
  return at_most("hvp_zero_direction", ok ? 0.0 : 1.0, 0.0, "zero answer and one ledger unit");
}

PropertyResult exact_channels_when_noiseless(uint64_t seed) {
  auto inst = small_lambda_sum(4, 0.0, 0.0);
  auto o = inst.make_oracle(seed);
  CounterRng r(derive_seed(seed, "probe"));
  double worst = 0.0;
  for (int k = 0; k < 100; ++k) {
    const Vec x = detail::uniform_box(r, 4, -2, 2), v = r.normal_vector(4);
    worst = std::max(worst, (o->query_grad(x) - inst.objective->gradient(x)).cwiseAbs().maxCoeff());
    worst = std::max(worst, (o->query_hvp(x, v) - inst.objective->hvp(x, v)).cwiseAbs().maxCoeff());
    worst = std::max(worst, (o->query_hess(x) - inst.objective->hessian(x)).cwiseAbs().maxCoeff());
  }
  return at_most("exact_channels_when_noiseless", worst, 0.0);
}

PropertyResult matrix_concentration(int dim, int samples, double sigma, int reps, uint64_t seed) {
  const Mat A = Mat::Identity(dim, dim);
  auto inst = make_quadratic_instance(A, Vec::Zero(dim), noise(0.0, sigma));
  auto o = inst.make_oracle(seed);
  const Vec x = Vec::Zero(dim);
  double acc = 0.0;
  for (int rep = 0; rep < reps; ++rep) {
    Mat mean = Mat::Zero(dim, dim);
    for (int k = 0; k < samples; ++k) mean += o->query_hess(x);
    mean /= samples;
    const SymEig e = sym_eig(mean - A);
    const double op = std::max(std::fabs(e.values[0]), std::fabs(e.values[dim - 1]));
    acc += op * op;
  }
  const double bound = 22.0 * sigma * sigma * std::log(double(dim)) / samples;
  return at_most(fmt("matrix_concentration_d", dim, "_n", samples), acc / reps, bound);
}

PropertyResult ledger_conservation(uint64_t seed) {
  try {
    NoiseParams n = noise(0.5, 0.5);
    auto inst = make_lambda_sum_instance(Vec::Constant(3, 0.3), n);
    int bad = 0;
    std::string what;
    for (Algorithm a : {Algorithm::sgd, Algorithm::sgd_hvp_rvr, Algorithm::cubic_rvr, Algorithm::sosp_hvp,
                        Algorithm::sosp_cubic}) {
      SolverParams sp;
      sp.epsilon = 0.3;
      sp.gamma = 0.5;
      sp.overrides.T = 60;
      const RunResult r = run_algorithm(a, inst, sp, seed);
      const QueryLedger& l = r.ledger;
      if (l.total() != l.grad + l.hvp + l.hess + l.value || l.total() != r.substreams) {
        ++bad;
        what += to_string(a) + " ";
      }
    }
    return at_most("ledger_conservation", bad, 0, what.empty() ? "all algorithms" : what);
  } catch (const std::exception& e) {
    return detail::failed("ledger_conservation", e);
  }
}

namespace {

// max over probes of |fd - exact| / max(|exact|, 1) for gradient and HVP.
double fd_error(const Objective& f, CounterRng& r, int probes, double box) {
  const double h = 1e-4;
  const int d = f.dim();
  double worst = 0.0;
  for (int k = 0; k < probes; ++k) {
    const Vec x = detail::uniform_box(r, d, -box, box);
    const Vec g = f.gradient(x);
    Vec fd(d);
    for (int i = 0; i < d; ++i) {
      Vec e = Vec::Zero(d);
      e[i] = h;
      fd[i] = (f.value(x + e) - f.value(x - e)) / (2 * h);
    }
    worst = std::max(worst, (fd - g).norm() / std::max(g.norm(), 1.0));
    const Vec v = r.unit_vector(d);
    const Vec hv = f.hvp(x, v);
    const Vec fdh = (f.gradient(x + h * v) - f.gradient(x - h * v)) / (2 * h);
    worst = std::max(worst, (fdh - hv).norm() / std::max(hv.norm(), 1.0));
    const Mat H = f.hessian(x);
    worst = std::max(worst, (H * v - hv).norm() / std::max(hv.norm(), 1.0));
  }
  return worst;
}

}  // namespace

PropertyResult finite_difference_consistency(int probes, uint64_t seed) {
  CounterRng r(derive_seed(seed, "fd"));
  std::vector<std::shared_ptr<const Objective>> fs;
  {
    Mat A = detail::random_symmetric(r, 5);
    fs.push_back(std::make_shared<Quadratic>(A, r.normal_vector(5)));
  }
  fs.push_back(std::make_shared<LambdaSum>(detail::uniform_box(r, 6, -1, 1)));
  fs.push_back(std::make_shared<CubicCoordinate>(4, 1.5, 0.3));
  fs.push_back(std::make_shared<SaddleChain>(3, 5));
  fs.push_back(std::make_shared<ScaledRamp>(0.1, 3));
  fs.push_back(std::make_shared<LogisticErm>(LogisticErm::random(30, 4, 0.1, seed)));
  fs.push_back(std::make_shared<QuadraticFiniteSum>(Mat::Identity(4, 4), Vec::Ones(4), 0.5, 5, seed));
  fs.push_back(std::make_shared<ChainFunction>(ChainKind::eps_chain, 6));
  fs.push_back(std::make_shared<ChainFunction>(ChainKind::gamma_chain, 6));
  double worst = 0.0;
  std::string arg;
  for (const auto& f : fs) {
    const double e = fd_error(*f, r, probes, 2.0);
    if (e > worst) {
      worst = e;
      arg = f->name();
    }
  }
  return at_most("finite_difference_consistency", worst, 1e-5, "worst objective: " + arg);
}

PropertyResult finite_diff_hvp_exact_on_quadratic(uint64_t seed) {
  CounterRng r(derive_seed(seed, "fdq"));
  const Mat A = detail::random_symmetric(r, 4);
  auto inst = make_quadratic_instance(A + 6 * Mat::Identity(4, 4), r.normal_vector(4), noise(0.0, 0.0, 2));
  auto o = inst.make_oracle(seed);
  double worst = 0.0;
  for (double delta : {1e-3, 0.1, 1.0, 10.0}) {
    const Vec x = r.normal_vector(4), u = r.unit_vector(4);
    const Vec fd = finite_diff_hvp(*o, x, u, delta);
    worst = std::max(worst, (fd - inst.objective->hvp(x, u)).norm());
  }
  return at_most("finite_diff_hvp_exact_on_quadratic", worst, 1e-9);
}

PropertyResult finite_diff_hvp_cubic_bias() {
  auto f = std::make_shared<CubicCoordinate>(1, 1.0, 0.0);
  ProblemInstance inst{f, Regularity{1.0, 1.0, 1.0}, noise(0.0, 0.0, 2), {}};
  auto o = inst.make_oracle(1);
  const Vec fd = finite_diff_hvp(*o, Vec::Zero(1), Vec::Ones(1), 0.2);
  return at_most("finite_diff_hvp_cubic_bias", std::fabs(fd[0] - 0.1), 1e-12, fmt("estimate ", fd[0]));
}

PropertyResult finite_diff_hvp_variance(double spread, int draws, uint64_t seed) {
  auto f = std::make_shared<QuadraticFiniteSum>(Mat::Identity(3, 3), Vec::Zero(3), spread, 16, seed);
  NoiseParams n = noise(0.0, spread, 2);
  n.sigma2_as = spread;
  auto o = std::make_unique<FiniteSumOracle>(f, Regularity{1.0, 1.0 + spread, 1e-9}, n, seed);
  CounterRng r(derive_seed(seed, "probe"));
  const Vec x = r.normal_vector(3), u = r.unit_vector(3);
  const double delta = 0.05;
  Vec mean = Vec::Zero(3);
  std::vector<Vec> draws_v;
  draws_v.reserve(draws);
  for (int k = 0; k < draws; ++k) {
    draws_v.push_back(finite_diff_hvp(*o, x, u, delta));
    mean += draws_v.back();
  }
  mean /= draws;
  double var = 0.0;
  for (const Vec& v : draws_v) var += (v - mean).squaredNorm();
  var /= (draws - 1);
  // Quadratic components: zero third derivative, so the bias term vanishes.
  return at_most("finite_diff_hvp_variance", var, spread * spread);
}

PropertyResult mss_finite_sum(double spread, uint64_t seed) {
  auto f = std::make_shared<QuadraticFiniteSum>(Mat::Identity(3, 3), Vec::Ones(3), spread, 8, seed);
  NoiseParams n = noise(0.0, spread, 2);
  n.sigma2_as = spread;
  FiniteSumOracle o(f, Regularity{1.0, 1.0 + spread, 1e-9}, n, seed);
  MssOptions opt;
  opt.seed = seed;
  const MssReport rep = verify_mss_equivalence(o, opt);
  return at_most("mss_finite_sum", rep.max_ratio, spread * spread * (1.0 + opt.tolerance));
}

PropertyResult mss_zero_noise(uint64_t seed) {
  auto inst = small_lambda_sum(3, 0.0, 0.0);
  inst.noise.query_points = 2;
  auto o = inst.make_oracle(seed);
  MssOptions opt;
  opt.seed = seed;
  opt.samples = 200;
  const MssReport rep = verify_mss_equivalence(*o, opt);
  return at_most("mss_zero_noise", rep.max_ratio, 0.0);
}

PropertyResult mss_counterexample(uint64_t seed) {
  auto f = std::make_shared<Quadratic>(Mat::Identity(3, 3), Vec::Zero(3));
  DirectionalNoiseOracle o(f, Regularity{1.0, 1.0, 1.0}, 2, seed);
  MssOptions opt;
  opt.seed = seed;
  opt.diagnostic = true;
  const MssReport rep = verify_mss_equivalence(o, opt);
  PropertyResult r = at_least("mss_counterexample_flagged", rep.max_ratio, 1e3 * opt.tolerance,
                              rep.diverging ? "flagged diverging" : "not flagged");
  r.passed = r.passed && rep.diverging && !rep.within_bound;
  return r;
}

}  // namespace props
}  // namespace sosp
