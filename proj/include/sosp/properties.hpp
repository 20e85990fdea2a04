#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace sosp {

// Outcome of one checked property.  `value` is the observed statistic and
// `bound` its limit; `margin` is the slack in the passing direction
// (negative when violated).
struct PropertyResult {
  std::string suite;
  std::string name;
  bool passed = false;
  double value = 0.0;
  double bound = 0.0;
  double margin = 0.0;
  std::string detail;
};

PropertyResult at_most(std::string name, double value, double bound, std::string detail = {});
PropertyResult at_least(std::string name, double value, double bound, std::string detail = {});

namespace props {

// ---- core
PropertyResult gradient_unbiased(double sigma1 = 0.5, int draws = 10000, uint64_t seed = 42);
PropertyResult gradient_noise_norm(double sigma1 = 0.5, int draws = 10000, uint64_t seed = 42);
PropertyResult hvp_unbiased(double sigma2 = 1.0, int draws = 10000, uint64_t seed = 42);
PropertyResult hvp_noise_norm(double sigma2 = 1.0, int draws = 10000, uint64_t seed = 42);
PropertyResult hessian_noise_exact(double sigma2 = 1.0, int draws = 2000, uint64_t seed = 42);
PropertyResult hvp_zero_direction(uint64_t seed = 42);
PropertyResult exact_channels_when_noiseless(uint64_t seed = 42);
// E|mean of n Hessian draws - Hessian|_op^2 <= 22 sigma^2 ln(d) / n.
PropertyResult matrix_concentration(int dim, int samples, double sigma, int reps, uint64_t seed = 42);
PropertyResult ledger_conservation(uint64_t seed = 42);
PropertyResult finite_difference_consistency(int probes = 100, uint64_t seed = 42);
PropertyResult finite_diff_hvp_exact_on_quadratic(uint64_t seed = 42);
PropertyResult finite_diff_hvp_cubic_bias();
PropertyResult finite_diff_hvp_variance(double spread = 0.3, int draws = 10000, uint64_t seed = 42);
PropertyResult mss_finite_sum(double spread = 0.5, uint64_t seed = 42);
PropertyResult mss_zero_noise(uint64_t seed = 42);
PropertyResult mss_counterexample(uint64_t seed = 42);

// ---- hvp_rvr
PropertyResult rvr_arithmetic();
PropertyResult rvr_empty_path(uint64_t seed = 42);
PropertyResult rvr_exact_on_quadratic(uint64_t seed = 42);
PropertyResult rvr_fresh_variance(int reps = 2000, uint64_t seed = 42);
PropertyResult rvr_path_bias(uint64_t seed = 42);
PropertyResult rvr_path_variance(int reps = 4000, uint64_t seed = 42);
PropertyResult rvr_query_determinism(uint64_t seed = 42);
// Mean queries per call against the closed-form budget at three parameter points.
PropertyResult rvr_query_budget(int calls = 10000, uint64_t seed = 42);
// Mean squared error along an SGD trajectory on the Lambda-sum instance.
PropertyResult rvr_error_along_trajectory(int steps = 2000, int reps = 50, uint64_t seed = 42);
PropertyResult rvr_fresh_only_error(int steps = 200, int reps = 20, uint64_t seed = 42);

// ---- subproblems
PropertyResult cubic_examples();
PropertyResult cubic_kkt_random(int models = 1000, uint64_t seed = 42);
PropertyResult cubic_brute_force(int models = 30, int samples = 100000, uint64_t seed = 42);
PropertyResult secular_monotone(int models = 200, uint64_t seed = 42);
PropertyResult gradient_descent_lemma(int probes = 1000, uint64_t seed = 42);
PropertyResult cubic_descent_lemma(int probes = 1000, uint64_t seed = 42);
PropertyResult oja_psd(int runs = 100, uint64_t seed = 42);
PropertyResult oja_negative(int runs = 100, uint64_t seed = 42);
PropertyResult oja_noiseless(int runs = 100, uint64_t seed = 42);
PropertyResult exact_curvature_examples();
PropertyResult curvature_step_descent(int probes = 500, uint64_t seed = 42);

// ---- solvers
PropertyResult parameter_examples();
PropertyResult parameter_fidelity(int cases = 200, uint64_t seed = 42);
PropertyResult horizon_zero(uint64_t seed = 42);
PropertyResult sgd_hvp_rvr_noiseless_quadratic(uint64_t seed = 42);
PropertyResult cubic_rvr_noiseless_descent(uint64_t seed = 42);
PropertyResult sosp_cubic_noiseless_quadratic(uint64_t seed = 42);
PropertyResult sosp_hvp_convex_no_certificates(uint64_t seed = 42);
PropertyResult sgd_hvp_rvr_lambda_sum_success(int runs = 40, uint64_t seed = 42);
PropertyResult sgd_hvp_rvr_telescoped_descent(uint64_t seed = 42);
PropertyResult sgd_hvp_rvr_ledger_budget(int runs = 5, uint64_t seed = 42);
PropertyResult output_uniformity(int runs = 2000, uint64_t seed = 42);
// Fraction of runs whose output has |grad F| <= grad_factor * eps and
// lambda_min >= -4 gamma on the saddle chain.
PropertyResult sosp_hvp_quality(int runs = 40, uint64_t seed = 42);
PropertyResult sosp_cubic_quality(int runs = 40, uint64_t seed = 42);

// ---- hard_instances
PropertyResult component_examples();
PropertyResult chain_examples();
PropertyResult prog_examples();
PropertyResult large_gradient_audit(int probes = 1000, uint64_t seed = 42);
PropertyResult gamma_eigenvalue_audit(int probes = 1000, uint64_t seed = 42);
PropertyResult tridiagonal_audit(int probes = 1000, uint64_t seed = 42);
PropertyResult component_bounds_audit(int probes = 100000, uint64_t seed = 42);
PropertyResult scaled_eps_audit(int probes = 1000, uint64_t seed = 42);
PropertyResult scaled_gamma_audit(int probes = 1000, uint64_t seed = 42);
PropertyResult zero_chain_support(int probes = 2000, uint64_t seed = 42);
PropertyResult zero_chain_reveal_rate(int draws = 10000, uint64_t seed = 42);
PropertyResult zero_chain_moments(int draws = 10000, uint64_t seed = 42);
PropertyResult gamma_gradient_noiseless(int draws = 10000, uint64_t seed = 42);
PropertyResult chain_finite_differences(int probes = 200, uint64_t seed = 42);
PropertyResult zero_respecting_deterministic();
PropertyResult discovery_time_geometric(int runs = 500, uint64_t seed = 42);
// Deadline-failure fraction <= 2 delta at (T, rho, delta).
PropertyResult progress_deadline_failures(int T = 20, double rho = 0.01, double delta = 0.1, int runs = 500,
                                          uint64_t seed = 42);
// Median queries to full progress >= 0.8 (T - 1)/(2 rho).
PropertyResult progress_median(int T = 20, double rho = 0.01, int runs = 500, uint64_t seed = 42);
PropertyResult scaled_eps_progress(int runs = 200, uint64_t seed = 42);

}  // namespace props

// Named property suites: core, hvp_rvr, subproblems, solvers, hard_instances.
const std::vector<std::string>& suite_names();
std::vector<PropertyResult> run_suite(const std::string& name);

}  // namespace sosp
