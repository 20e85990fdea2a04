#include <cmath>

#include "property_util.hpp"
#include "sosp/chain.hpp"
#include "sosp/cubic.hpp"
#include "sosp/curvature.hpp"
#include "sosp/errors.hpp"
#include "sosp/linalg.hpp"
#include "sosp/problems.hpp"

namespace sosp::props {

using detail::fmt;

namespace {

enum class ModelKind { generic, hard, hard_repeated, zero_gradient };

// Random cubic model; the hard kinds put g orthogonal to a negative bottom eigenspace.
CubicModel random_model(CounterRng& r, int d, ModelKind kind) {
  Vec lam(d);
  for (int i = 0; i < d; ++i) lam[i] = 2.0 * r.normal();
  std::sort(lam.data(), lam.data() + d);
  if (kind == ModelKind::hard || kind == ModelKind::hard_repeated) lam[0] = -std::fabs(lam[0]) - 0.1;
  if (kind == ModelKind::hard_repeated && d >= 2) lam[1] = lam[0];
  const Mat Q = detail::random_orthogonal(r, d);
  CubicModel m;
  m.H = Q * lam.asDiagonal() * Q.transpose();
  m.H = 0.5 * (m.H + m.H.transpose());
  m.g = r.normal_vector(d);
  if (kind == ModelKind::zero_gradient) m.g.setZero();
  if (kind == ModelKind::hard || kind == ModelKind::hard_repeated) {
    const int k = (kind == ModelKind::hard_repeated && d >= 2) ? 2 : 1;
    for (int j = 0; j < k; ++j) m.g -= Q.col(j) * Q.col(j).dot(m.g);
  }
  m.M = 0.2 + 4.8 * r.uniform();
  m.radius = 0.05 + 5.0 * r.uniform();
  return m;
}

ModelKind kind_of(int k) { return ModelKind(k % 4); }

double recomputed_residual(const CubicModel& m, const CubicSolution& s) {
  const Vec r = m.g + m.H * s.s + (0.5 * m.M * s.s.norm() + s.multiplier) * s.s;
  return r.norm();
}

}  // namespace

PropertyResult cubic_examples() {
  double err = 0.0;
  {
    CubicModel m{Vec::Unit(2, 0), Mat::Identity(2, 2), 2.0, 10.0};
    const CubicSolution s = solve_cubic_tr(m);
    Vec want(2);
    want << -(std::sqrt(5.0) - 1.0) / 2.0, 0.0;
    err = std::max(err, (s.s - want).norm());
    m.radius = 0.1;
    const CubicSolution b = solve_cubic_tr(m);
    want << -0.1, 0.0;
    err = std::max(err, (b.s - want).norm());
  }
  {
    Mat H = Mat::Zero(2, 2);
    H(0, 0) = -1.0;
    H(1, 1) = 1.0;
    const CubicModel m{Vec::Zero(2), H, 2.0, 10.0};
    const CubicSolution s = solve_cubic_tr(m);
    err = std::max(err, (s.s - Vec::Unit(2, 0)).norm());
    err = std::max(err, std::fabs(m.value(s.s) + 1.0 / 6.0));
    if (!s.hard_case) err = std::max(err, 1.0);
  }
  return at_most("cubic_examples", err, 1e-9, "interior, boundary and hard-case models");
}

PropertyResult cubic_kkt_random(int models, uint64_t seed) {
  CounterRng r(derive_seed(seed, "cubic_kkt"));
  double worst = 0.0;
  int hard = 0;
  for (int k = 0; k < models; ++k) {
    const int d = 1 + int(r.below(8));
    const CubicModel m = random_model(r, d, kind_of(k));
    const CubicSolution s = solve_cubic_tr(m);
    hard += s.hard_case;
    const double ns = s.s.norm();
    double bad = recomputed_residual(m, s);
    if (s.multiplier < 0.0) bad = std::max(bad, -s.multiplier);
    bad = std::max(bad, ns - m.radius * (1.0 + 1e-12));
    bad = std::max(bad, std::fabs(s.multiplier * (m.radius - ns)));
    // Global optimality: H + theta I is positive semidefinite.
    const double theta = 0.5 * m.M * ns + s.multiplier;
    bad = std::max(bad, -(lambda_min(m.H) + theta) - 1e-9);
    worst = std::max(worst, bad);
  }
  return at_most("cubic_kkt_random", worst, 1e-8, fmt(models, " models, ", hard, " hard cases"));
}

PropertyResult cubic_brute_force(int models, int samples, uint64_t seed) {
  CounterRng r(derive_seed(seed, "cubic_brute"));
  double worst = -std::numeric_limits<double>::infinity();
  for (int k = 0; k < models; ++k) {
    const int d = 1 + k % 3;
    const CubicModel m = random_model(r, d, kind_of(k / 3));
    const CubicSolution s = solve_cubic_tr(m);
    const double v = m.value(s.s);
    double best = m.value(Vec::Zero(d));
    for (int j = 0; j < samples; ++j) {
      const Vec u = r.unit_vector(d);
      const double rad = m.radius * std::pow(r.uniform(), 1.0 / d);
      best = std::min(best, m.value(rad * u));
    }
    worst = std::max(worst, v - best);
  }
  return at_most("cubic_brute_force", worst, 1e-6, "solver value minus best sampled value");
}

PropertyResult secular_monotone(int models, uint64_t seed) {
  CounterRng r(derive_seed(seed, "secular"));
  int violations = 0;
  for (int k = 0; k < models; ++k) {
    const int d = 1 + int(r.below(10));
    const CubicModel m = random_model(r, d, ModelKind::generic);
    const SymEig e = sym_eig(m.H);
    const Vec gh = e.vectors.transpose() * m.g;
    const double lo = std::max(0.0, -e.values[0]);
    double prev = std::numeric_limits<double>::infinity();
    for (int j = 1; j <= 200; ++j) {
      const double theta = lo + 1e-6 * std::pow(1.1, j);
      const double n = secular_norm(e, gh, theta);
      if (n > prev * (1.0 + 1e-12)) ++violations;
      prev = n;
    }
  }
  return at_most("secular_monotone", violations, 0, "non-increasing on sampled theta");
}

namespace {

struct TestObjective {
  std::shared_ptr<const Objective> f;
  double l1, l2;
  bool tri;
};

std::vector<TestObjective> lemma_objectives(CounterRng& r) {
  std::vector<TestObjective> out;
  out.push_back({std::make_shared<LambdaSum>(detail::uniform_box(r, 5, -1, 1)), LambdaSum::kL1, LambdaSum::kL2, true});
  const ChainConstants& ce = chain_constants(ChainKind::eps_chain);
  out.push_back({std::make_shared<ChainFunction>(ChainKind::eps_chain, 6), ce.l1, ce.l2, true});
  const ChainConstants& cg = chain_constants(ChainKind::gamma_chain);
  out.push_back({std::make_shared<ChainFunction>(ChainKind::gamma_chain, 6), cg.l1, cg.l2, true});
  const Mat A = detail::random_symmetric(r, 4);
  const double l1 = sym_eig(A).values.cwiseAbs().maxCoeff();
  out.push_back({std::make_shared<Quadratic>(A, r.normal_vector(4)), l1, 1.0, false});
  return out;
}

}  // namespace

PropertyResult gradient_descent_lemma(int probes, uint64_t seed) {
  CounterRng r(derive_seed(seed, "gd_lemma"));
  const auto objs = lemma_objectives(r);
  int failures = 0;
  double worst = std::numeric_limits<double>::infinity();
  for (int k = 0; k < probes; ++k) {
    const TestObjective& t = objs[k % objs.size()];
    const Objective& f = *t.f;
    const Vec x = detail::uniform_box(r, f.dim(), -3, 3);
    const Vec gr = f.gradient(x);
    const Vec g = gr + (r.uniform() * (2.0 * gr.norm() + 1.0)) * r.unit_vector(f.dim());
    const double eta = r.uniform_open() / (2.0 * t.l1);
    const double fx = f.value(x);
    const double lhs = fx - f.value(x - eta * g);
    const double rhs = eta / 8.0 * gr.squaredNorm() - 0.75 * eta * (gr - g).squaredNorm();
    const double slack = lhs - rhs + 1e-12 * (1.0 + std::fabs(fx));
    worst = std::min(worst, lhs - rhs);
    failures += slack < 0.0;
  }
  return at_most("gradient_descent_lemma", failures, 0, fmt("smallest slack ", worst));
}

PropertyResult cubic_descent_lemma(int probes, uint64_t seed) {
  CounterRng r(derive_seed(seed, "cubic_lemma"));
  const auto objs = lemma_objectives(r);
  int failures = 0;
  double worst_ratio = std::numeric_limits<double>::infinity();
  for (int k = 0; k < probes; ++k) {
    const TestObjective& t = objs[k % objs.size()];
    const Objective& f = *t.f;
    const Vec x = detail::uniform_box(r, f.dim(), -3, 3);
    const CubicModel m{f.gradient(x), f.hessian(x), 4.0 * t.l2 * (1.0 + 2.0 * r.uniform()),
                       0.05 + 3.0 * r.uniform()};
    const CubicSolution s = solve_cubic_tr(m, 1e-10, t.tri);
    const double fx = f.value(x);
    const double drop = fx - f.value(x + s.s);
    const double need = m.M / 12.0 * std::pow(s.s.norm(), 3);
    failures += drop + 1e-12 * (1.0 + std::fabs(fx)) < need;
    if (need > 0.0) worst_ratio = std::min(worst_ratio, drop / need);
  }
  return at_most("cubic_descent_lemma", failures, 0, fmt("smallest drop / (M/12 |s|^3) = ", worst_ratio));
}

namespace {

ProblemInstance quadratic_with_noise(const Vec& diag, double s2, double l1) {
  NoiseParams n;
  n.sigma2 = s2;
  n.sigma2_as = s2;
  auto q = std::make_shared<Quadratic>(Mat(diag.asDiagonal()), Vec::Zero(diag.size()));
  return {q, Regularity{1.0, l1, 1.0}, n, {}};
}

struct OjaTally {
  int certificates = 0;
  int good = 0;  // certificates with exact Rayleigh <= -2 gamma
};

OjaTally run_oja(const ProblemInstance& inst, double gamma, int runs, uint64_t seed) {
  OjaTally t;
  const Vec x = Vec::Zero(inst.dim());
  const Mat H = inst.objective->hessian(x);
  for (int k = 0; k < runs; ++k) {
    auto o = inst.make_oracle(derive_seed(seed, "oracle", {uint64_t(k)}));
    CounterRng rng(derive_seed(seed, "algorithm", {uint64_t(k)}));
    const CurvatureCertificate c = oja_search(*o, x, gamma, 0.05, rng);
    if (!c.direction) continue;
    ++t.certificates;
    const Vec& u = *c.direction;
    t.good += u.dot(H * u) <= -2.0 * gamma && std::fabs(u.norm() - 1.0) <= 1e-12;
  }
  return t;
}

Vec negative_family(int d) {
  Vec v = Vec::Constant(d, 0.1);
  v[0] = -0.9;
  return v;
}

}  // namespace

PropertyResult oja_psd(int runs, uint64_t seed) {
  const OjaTally t = run_oja(quadratic_with_noise(Vec::Constant(10, 0.5), 0.2, 0.5), 0.1, runs, seed);
  return detail::fraction_at_least("oja_psd_returns_none", runs - t.certificates, runs, 0.9);
}

PropertyResult oja_negative(int runs, uint64_t seed) {
  const OjaTally t = run_oja(quadratic_with_noise(negative_family(50), 0.2, 0.9), 0.1, runs, seed);
  return detail::fraction_at_least("oja_negative_certificates", t.good, runs, 0.9);
}

PropertyResult oja_noiseless(int runs, uint64_t seed) {
  const OjaTally t = run_oja(quadratic_with_noise(negative_family(50), 0.0, 0.9), 0.1, runs, seed);
  return detail::fraction_at_least("oja_noiseless_certificates", t.good, runs, 1.0);
}

PropertyResult exact_curvature_examples() {
  int bad = 0;
  Mat H = Mat::Zero(2, 2);
  H(0, 0) = -1.0;
  H(1, 1) = 2.0;
  const auto u = exact_curvature_direction(H, 0.2);
  bad += !u || std::fabs(std::fabs((*u)[0]) - 1.0) > 1e-12 || std::fabs((*u)[1]) > 1e-12;
  bad += exact_curvature_direction(Mat::Identity(3, 3), 0.05).has_value();
  Mat B = Mat::Zero(2, 2);
  B(0, 0) = -0.8;
  B(1, 1) = 1.0;
  bad += !exact_curvature_direction(B, 0.2).has_value();
  return at_most("exact_curvature_examples", bad, 0, "diag(-1,2), identity, boundary -4 gamma");
}

PropertyResult curvature_step_descent(int probes, uint64_t seed) {
  CounterRng r(derive_seed(seed, "curv_step"));
  const LambdaSum f(detail::uniform_box(r, 4, -1, 1));
  const double l2 = LambdaSum::kL2;
  int failures = 0, used = 0;
  double worst = std::numeric_limits<double>::infinity();
  while (used < probes) {
    const Vec x = detail::uniform_box(r, 4, -3, 3);
    const SymEig e = sym_eig(f.hessian(x));
    if (e.values[0] >= -1e-3) continue;
    ++used;
    const Vec u = e.vectors.col(0);
    const double gamma = -e.values[0] / 2.0 * (0.1 + 0.9 * r.uniform());
    const double fx = f.value(x);
    double drop = 0.0;
    for (double sgn : {-1.0, 1.0}) drop += 0.5 * (fx - f.value(x + sgn * (gamma / l2) * u));
    CounterRng rr(derive_seed(seed, "sign", {uint64_t(used)}));
    const Vec y = curvature_step(x, u, gamma, l2, rr);
    const double need = 5.0 * std::pow(gamma, 3) / (6.0 * l2 * l2);
    failures += drop + 1e-12 * (1.0 + std::fabs(fx)) < need;
    failures += std::fabs((y - x).norm() - gamma / l2) > 1e-12;
    worst = std::min(worst, drop / need);
  }
  return at_most("curvature_step_descent", failures, 0, fmt("smallest mean drop / bound = ", worst));
}

}  // namespace sosp::props
