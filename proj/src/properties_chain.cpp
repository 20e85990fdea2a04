#include <algorithm>
#include <cmath>

#include "property_util.hpp"
#include "sosp/chain.hpp"
#include "sosp/components.hpp"
#include "sosp/errors.hpp"
#include "sosp/linalg.hpp"
#include "sosp/zero_chain.hpp"

namespace sosp::props {

using detail::fmt;

namespace {

PropertyResult from_audit(const std::string& name, const AuditResult& a) {
  PropertyResult r = at_most(name, a.failures, 0, fmt(a.probes, " probes, worst margin ", a.worst_margin));
  r.margin = a.worst_margin;
  return r;
}

// First p coordinates of magnitude in [0.5, 2] with random signs, the rest
// below `tail` in magnitude.
Vec structured_point(CounterRng& r, int T, int p, double tail) {
  Vec x(T);
  for (int i = 0; i < T; ++i) {
    if (i < p) x[i] = (0.5 + 1.5 * r.uniform()) * r.rademacher();
    else x[i] = tail * (2.0 * r.uniform() - 1.0);
  }
  return x;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace

PropertyResult component_examples() {
  const double se = std::sqrt(std::exp(1.0));
  double err = 0.0;
  err = std::max(err, std::fabs(psi(0.5)));
  err = std::max(err, std::fabs(psi(1.0) - 1.0));
  err = std::max(err, std::fabs(psi(0.75) - std::exp(-3.0)));
  err = std::max(err, std::fabs(phi(0.0, 1) - se));
  err = std::max(err, std::fabs(phi(0.0) - se * std::sqrt(2.0 * M_PI) / 2.0));
  err = std::max(err, std::fabs(phi(0.0, 2)));
  err = std::max(err, std::fabs(lambda_fn(0.0)));
  err = std::max(err, std::fabs(lambda_fn(0.0, 2) + 8.0));
  err = std::max(err, std::fabs(lambda_fn(40.0) + 8.0));
  return at_most("component_examples", err, 1e-12);
}

PropertyResult chain_examples() {
  const double se = std::sqrt(std::exp(1.0));
  double err = 0.0;
  const ChainFunction f(ChainKind::eps_chain, 5);
  const Vec z = Vec::Zero(5);
  err = std::max(err, std::fabs(f.value(z) + phi(0.0)));
  Vec g0 = Vec::Zero(5);
  g0[0] = -se;
  err = std::max(err, (f.gradient(z) - g0).cwiseAbs().maxCoeff());
  const ChainFunction g(ChainKind::gamma_chain, 5);
  err = std::max(err, std::fabs(g.value(z)));
  const Mat H = g.hessian(z);
  err = std::max(err, std::fabs(H(0, 0) + 8.0));
  err = std::max(err, std::max(0.0, lambda_min(H, true) + 8.0));
  return at_most("chain_examples", err, 1e-12);
}

PropertyResult prog_examples() {
  int bad = 0;
  Vec a(4), b = Vec::Zero(4), c(4);
  a << 0.3, 0.6, 0, 0;
  c << 1, 0, 2, 0;
  bad += prog(a, 0.5) != 2;
  bad += prog(b, 0.9) != 0;
  bad += prog(c, 0.0) != 3;
  return at_most("prog_examples", bad, 0);
}

PropertyResult large_gradient_audit(int probes, uint64_t seed) {
  return from_audit("large_gradient_audit", audit_large_gradient(10, probes, seed));
}

PropertyResult gamma_eigenvalue_audit(int probes, uint64_t seed) {
  return from_audit("gamma_eigenvalue_audit", audit_gamma_eigenvalue(10, probes, seed));
}

PropertyResult tridiagonal_audit(int probes, uint64_t seed) {
  const AuditResult a = audit_tridiagonal(ChainKind::eps_chain, 10, probes / 2, seed);
  const AuditResult b = audit_tridiagonal(ChainKind::gamma_chain, 10, probes - probes / 2, seed + 1);
  return at_most("tridiagonal_audit", a.failures + b.failures, 0, fmt(a.probes + b.probes, " probes"));
}

PropertyResult component_bounds_audit(int probes, uint64_t seed) {
  return from_audit("component_bounds_audit", audit_component_bounds(probes, seed));
}

PropertyResult scaled_eps_audit(int probes, uint64_t seed) {
  const ChainInstance inst = build_eps_hard_instance(0.01, 1.0, 1.0, 1.0, 1.0, 100.0);
  PropertyResult r = from_audit("scaled_eps_audit", audit_scaled_instance(inst, probes, seed));
  r.detail += fmt(", T = ", inst.recipe.T, ", binding ", inst.recipe.binding);
  return r;
}

PropertyResult scaled_gamma_audit(int probes, uint64_t seed) {
  const ChainInstance inst = build_gamma_hard_instance(5e-4, 1.0, 1.0, 1.0, 100.0);
  PropertyResult r = from_audit("scaled_gamma_audit", audit_scaled_instance(inst, probes, seed));
  r.detail += fmt(", T = ", inst.recipe.T);
  return r;
}

PropertyResult zero_chain_support(int probes, uint64_t seed) {
  const int T = 8;
  int violations = 0, checked = 0;
  for (ChainKind kind : {ChainKind::eps_chain, ChainKind::gamma_chain}) {
    const ChainInstance inst = make_unscaled_chain_instance(kind, T, 0.3);
    ZeroChainOracle o(inst, seed);
    CounterRng r(derive_seed(seed, "support", {uint64_t(kind)}));
    const double tail = kind == ChainKind::eps_chain ? 0.25 : 0.0;
    for (int k = 0; k < probes; ++k) {
      const Vec x = structured_point(r, T, int(r.below(T + 1)), tail);
      const int p = o.progress(x);  // answers may be nonzero on 0-based indices <= p
      const Vec g = o.query_grad(x);
      const Mat H = o.query_hess(x);
      const Vec hv = o.query_hvp(x, r.normal_vector(T));
      for (int i = p + 1; i < T; ++i) {
        violations += g[i] != 0.0 || hv[i] != 0.0;
        violations += H.row(i).cwiseAbs().maxCoeff() != 0.0 || H.col(i).cwiseAbs().maxCoeff() != 0.0;
      }
      ++checked;
    }
  }
  return at_most("zero_chain_support", violations, 0, fmt(checked, " probe points, three channels"));
}

PropertyResult zero_chain_reveal_rate(int draws, uint64_t seed) {
  const int T = 8, p = 3;
  const double rho = 0.3;
  const ChainInstance inst = make_unscaled_chain_instance(ChainKind::eps_chain, T, rho);
  ZeroChainOracle o(inst, seed);
  Vec x = Vec::Zero(T);
  x.head(p).setOnes();
  int hits = 0;
  for (int k = 0; k < draws; ++k) hits += o.query_grad(x)[p] != 0.0;
  const double freq = double(hits) / draws;
  const double band = 3.0 * std::sqrt(rho * (1 - rho) / draws);
  return at_most("zero_chain_reveal_rate", std::fabs(freq - rho), band, fmt("frequency ", freq));
}

PropertyResult zero_chain_moments(int draws, uint64_t seed) {
  const int T = 8, p = 3;
  const double rho = 0.2;
  const ChainInstance inst = make_unscaled_chain_instance(ChainKind::eps_chain, T, rho);
  ZeroChainOracle o(inst, seed);
  Vec x = Vec::Zero(T);
  x.head(p).setOnes();
  const double gx = inst.chain->gradient(x)[p];
  const double hx = inst.chain->hessian(x)(p, p - 1);
  double worst = 0.0;
  std::string d;
  for (int channel = 0; channel < 2; ++channel) {
    const double exact = channel == 0 ? gx : hx;
    double s = 0.0, s2 = 0.0;
    for (int k = 0; k < draws; ++k) {
      const double v = channel == 0 ? o.query_grad(x)[p] : o.query_hess(x)(p, p - 1);
      s += v;
      s2 += v * v;
    }
    const double mean = s / draws;
    const double var = (s2 - draws * mean * mean) / (draws - 1);
    const double var_exact = exact * exact * (1 - rho) / rho;
    // Mean within a 3-sigma band, variance within 10%.
    worst = std::max(worst, std::fabs(mean - exact) / (3.0 * std::sqrt(var_exact / draws)));
    worst = std::max(worst, std::fabs(var / var_exact - 1.0) / 0.1);
    d += fmt(channel == 0 ? "grad" : "hess", " mean ", mean, " vs ", exact, ", var ", var, " vs ", var_exact, "; ");
  }
  return at_most("zero_chain_moments", worst, 1.0, d);
}

PropertyResult gamma_gradient_noiseless(int draws, uint64_t seed) {
  const ChainInstance inst = make_unscaled_chain_instance(ChainKind::gamma_chain, 6, 0.3);
  ZeroChainOracle o(inst, seed);
  CounterRng r(derive_seed(seed, "probe"));
  const Vec x = structured_point(r, 6, 3, 0.0);
  const Vec first = o.query_grad(x);
  int differ = first == inst.chain->gradient(x) ? 0 : 1;
  for (int k = 1; k < draws; ++k) differ += o.query_grad(x) != first;
  return at_most("gamma_gradient_noiseless", differ, 0);
}

PropertyResult chain_finite_differences(int probes, uint64_t seed) {
  CounterRng r(derive_seed(seed, "chain_fd"));
  const double h = 1e-4;
  double worst = 0.0;
  for (ChainKind kind : {ChainKind::eps_chain, ChainKind::gamma_chain}) {
    const ChainFunction f(kind, 6, 0.7, 1.3);
    for (int k = 0; k < probes; ++k) {
      const Vec x = detail::uniform_box(r, 6, -2, 2);
      const Vec g = f.gradient(x);
      const Mat H = f.hessian(x);
      Vec fd(6);
      Mat fh(6, 6);
      for (int i = 0; i < 6; ++i) {
        Vec e = Vec::Zero(6);
        e[i] = h;
        // Fourth-order central stencil.
        fd[i] = (8.0 * (f.value(x + e) - f.value(x - e)) - (f.value(x + 2 * e) - f.value(x - 2 * e))) / (12 * h);
        fh.col(i) = (8.0 * (f.gradient(x + e) - f.gradient(x - e)) - (f.gradient(x + 2 * e) - f.gradient(x - 2 * e))) /
                    (12 * h);
      }
      worst = std::max(worst, (fd - g).norm() / std::max(1.0, g.norm()));
      worst = std::max(worst, (fh - H).norm() / std::max(1.0, H.norm()));
    }
  }
  return at_most("chain_finite_differences", worst, 1e-5);
}

PropertyResult zero_respecting_deterministic() {
  int bad = 0;
  for (ChainKind kind : {ChainKind::eps_chain, ChainKind::gamma_chain}) {
    const ChainInstance inst = make_unscaled_chain_instance(kind, 10, 1.0);
    ZeroChainOracle o(inst, 1);
    const ProgressTrace t = zero_respecting_run(o, 1000);
    bad += !t.full_progress_at || *t.full_progress_at != 10 || t.final_progress != 10;
  }
  return at_most("zero_respecting_deterministic", bad, 0, "rho = 1, T = 10");
}

PropertyResult discovery_time_geometric(int runs, uint64_t seed) {
  const int T = 20;
  const double rho = 0.1;
  const ChainInstance inst = make_unscaled_chain_instance(ChainKind::eps_chain, T, rho);
  double s = 0.0;
  int n = 0;
  for (int k = 0; k < runs; ++k) {
    ZeroChainOracle o(inst, derive_seed(seed, "run", {uint64_t(k)}));
    const ProgressTrace t = zero_respecting_run(o, 1000000);
    uint64_t prev = 0;
    for (const auto& [q, p] : t.reveals) {
      s += double(q - prev);
      prev = q;
      ++n;
    }
  }
  const double mean = s / n;
  const double band = 3.0 * std::sqrt(1.0 - rho) / rho / std::sqrt(double(n));
  return at_most("discovery_time_geometric", std::fabs(mean - 1.0 / rho), band, fmt("mean ", mean));
}

namespace {

std::vector<double> full_progress_times(const ChainInstance& inst, int runs, uint64_t seed) {
  std::vector<double> out;
  const uint64_t cap = uint64_t(100.0 * inst.chain->length() / inst.rho);
  for (int k = 0; k < runs; ++k) {
    ZeroChainOracle o(inst, derive_seed(seed, "run", {uint64_t(k)}));
    const ProgressTrace t = zero_respecting_run(o, cap);
    out.push_back(t.full_progress_at ? double(*t.full_progress_at) : std::numeric_limits<double>::infinity());
  }
  return out;
}

}  // namespace

PropertyResult progress_deadline_failures(int T, double rho, double delta, int runs, uint64_t seed) {
  const ChainInstance inst = make_unscaled_chain_instance(ChainKind::eps_chain, T, rho);
  const double deadline = progress_deadline(T, rho, delta);
  int fails = 0;
  for (double t : full_progress_times(inst, runs, seed)) fails += t <= deadline;
  return at_most("progress_deadline_failures", double(fails) / runs, 2.0 * delta,
                 fmt(fails, "/", runs, " reached T before ", deadline));
}

PropertyResult progress_median(int T, double rho, int runs, uint64_t seed) {
  const ChainInstance inst = make_unscaled_chain_instance(ChainKind::eps_chain, T, rho);
  const double ref = (T - 1) / (2.0 * rho);
  return at_least("progress_median", median(full_progress_times(inst, runs, seed)), 0.8 * ref,
                  fmt("(T-1)/(2 rho) = ", ref));
}

PropertyResult scaled_eps_progress(int runs, uint64_t seed) {
  const ChainInstance inst = build_eps_hard_instance(0.01, 1.0, 1.0, 1.0, 1.0, 100.0);
  const int T = inst.chain->length();
  const double ref = (T - 1) / (2.0 * inst.rho);
  return at_least("scaled_eps_progress", median(full_progress_times(inst, runs, seed)), 0.8 * ref,
                  fmt("T = ", T, ", rho = ", inst.rho, ", (T-1)/(2 rho) = ", ref));
}

}  // namespace sosp::props
