// Acceptance suite: one PASS/FAIL line per criterion, each with a wall-clock limit.
// Usage: acceptance [--only N]

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <functional>
#include <string>
#include <vector>

#include "sosp/harness.hpp"
#include "sosp/properties.hpp"

using namespace sosp;

namespace {

struct Outcome {
  bool passed = true;
  std::string detail;
  void add(const PropertyResult& r) {
    passed = passed && r.passed;
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6g", r.value);
    detail += (detail.empty() ? "" : "; ") + r.name + "=" + buf + (r.passed ? "" : " [FAIL: " + r.detail + "]");
  }
};

struct Criterion {
  int id;
  const char* title;
  double time_limit_s;
  std::function<Outcome()> run;
};

// Slope windows and fit quality for the elbow sweep.
constexpr double kSgdSlope = -4.0, kRvrSlope = -3.0, kSlopeTol = 0.4, kMinR2 = 0.9;

Outcome elbow_sweep() {
  ExperimentConfig c;
  c.command = Command::sweep;
  c.instance.problem = "scaled_ramp";
  c.instance.dim = 2;
  c.instance.sigma1 = 1.0;
  c.instance.sigma2 = 1.0;
  c.solver.algorithms = {"sgd", "sgd_hvp_rvr"};
  c.eps_grid = {0.2, 0.1, 0.05, 0.025};
  c.replications = 20;
  c.seed = 42;
  const SweepReport r = run_sweep(c);
  Outcome o;
  auto check = [&](const std::string& alg, double target) {
    const SlopeFit& f = r.fits.at(alg);
    const bool ok = f.points.size() == c.eps_grid.size() && std::fabs(f.slope - target) <= kSlopeTol &&
                    f.r_squared >= kMinR2;
    char buf[160];
    std::snprintf(buf, sizeof buf, "%s slope=%.4f (target %.1f +- %.1f) r2=%.4f", alg.c_str(), f.slope, target,
                  kSlopeTol, f.r_squared);
    o.passed = o.passed && ok;
    o.detail += (o.detail.empty() ? "" : "; ") + std::string(buf) + (ok ? "" : " [FAIL]");
  };
  check("sgd", kSgdSlope);
  check("sgd_hvp_rvr", kRvrSlope);
  return o;
}

std::vector<Criterion> criteria() {
  return {
      {1, "estimator error along an SGD trajectory <= 1.2 eps^2", 120,
       [] {
         Outcome o;
         o.add(props::rvr_error_along_trajectory(2000, 50));
         return o;
       }},
      {2, "estimator queries per call within the closed-form budget", 60,
       [] {
         Outcome o;
         o.add(props::rvr_query_budget(10000));
         return o;
       }},
      {3, "elbow slopes of median queries-to-success", 1800, elbow_sweep},
      {4, "gradient and cubic descent inequalities", 60,
       [] {
         Outcome o;
         o.add(props::gradient_descent_lemma(1000));
         o.add(props::cubic_descent_lemma(1000));
         return o;
       }},
      {5, "matrix concentration of averaged Hessians", 120,
       [] {
         Outcome o;
         o.add(props::matrix_concentration(10, 100, 1.0, 500));
         o.add(props::matrix_concentration(50, 200, 0.5, 500));
         return o;
       }},
      {6, "cubic subproblem KKT residuals and brute-force optimality", 120,
       [] {
         Outcome o;
         o.add(props::cubic_kkt_random(1000));
         o.add(props::cubic_brute_force(30, 100000));
         return o;
       }},
      {7, "Oja certificates and PSD rejections", 180,
       [] {
         Outcome o;
         o.add(props::oja_negative(100));
         o.add(props::oja_psd(100));
         return o;
       }},
      {8, "second-order output quality on the saddle chain", 1800,
       [] {
         Outcome o;
         o.add(props::sosp_hvp_quality(40));
         o.add(props::sosp_cubic_quality(40));
         return o;
       }},
      {9, "hard-instance structure audits", 300,
       [] {
         Outcome o;
         o.add(props::large_gradient_audit(1000));
         o.add(props::gamma_eigenvalue_audit(1000));
         o.add(props::tridiagonal_audit(1000));
         o.add(props::component_bounds_audit(100000));
         o.add(props::scaled_eps_audit(1000));
         o.add(props::scaled_gamma_audit(1000));
         o.add(props::zero_chain_support(2000));
         o.add(props::zero_chain_reveal_rate(10000));
         o.add(props::zero_chain_moments(10000));
         o.add(props::gamma_gradient_noiseless(10000));
         return o;
       }},
      {10, "zero-respecting progress deadline and median", 300,
       [] {
         Outcome o;
         o.add(props::progress_deadline_failures(20, 0.01, 0.1, 500));
         o.add(props::progress_median(20, 0.01, 500));
         return o;
       }},
  };
}

}  // namespace

int main(int argc, char** argv) {
  int only = 0;
  for (int k = 1; k < argc; ++k) {
    if (std::strcmp(argv[k], "--only") == 0 && k + 1 < argc) only = std::atoi(argv[++k]);
    else {
      std::fprintf(stderr, "usage: %s [--only N]\n", argv[0]);
      return 2;
    }
  }
  int failures = 0, ran = 0;
  for (const Criterion& c : criteria()) {
    if (only && c.id != only) continue;
    ++ran;
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o.passed = false;
      o.detail = std::string("exception: ") + e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool in_time = secs <= c.time_limit_s;
    const bool ok = o.passed && in_time;
    failures += !ok;
    std::printf("%s criterion %d: %s | %s | %.1f s (limit %.0f s%s)\n", ok ? "PASS" : "FAIL", c.id, c.title,
                o.detail.c_str(), secs, c.time_limit_s, in_time ? "" : ", exceeded");
    std::fflush(stdout);
  }
  if (ran == 0) {
    std::fprintf(stderr, "no criterion %d\n", only);
    return 2;
  }
  return failures == 0 ? 0 : 1;
}
