#include <functional>

#include "property_util.hpp"
#include "sosp/errors.hpp"

namespace sosp {

namespace {

using Check = std::function<PropertyResult()>;

std::vector<Check> checks_for(const std::string& suite) {
  using namespace props;
  if (suite == "core")
    return {[] { return gradient_unbiased(); },
            [] { return gradient_noise_norm(); },
            [] { return hvp_unbiased(); },
            [] { return hvp_noise_norm(); },
            [] { return hessian_noise_exact(); },
            [] { return hvp_zero_direction(); },
            [] { return exact_channels_when_noiseless(); },
            [] { return matrix_concentration(10, 100, 1.0, 200); },
            [] { return ledger_conservation(); },
            [] { return finite_difference_consistency(); },
            [] { return finite_diff_hvp_exact_on_quadratic(); },
            [] { return finite_diff_hvp_cubic_bias(); },
            [] { return finite_diff_hvp_variance(); },
            [] { return mss_finite_sum(); },
            [] { return mss_zero_noise(); },
            [] { return mss_counterexample(); }};
  if (suite == "hvp_rvr")
    return {[] { return rvr_arithmetic(); },
            [] { return rvr_empty_path(); },
            [] { return rvr_exact_on_quadratic(); },
            [] { return rvr_fresh_variance(); },
            [] { return rvr_path_bias(); },
            [] { return rvr_path_variance(); },
            [] { return rvr_query_determinism(); },
            [] { return rvr_query_budget(2000); },
            [] { return rvr_error_along_trajectory(500, 10); },
            [] { return rvr_fresh_only_error(); }};
  if (suite == "subproblems")
    return {[] { return cubic_examples(); },
            [] { return cubic_kkt_random(); },
            [] { return cubic_brute_force(); },
            [] { return secular_monotone(); },
            [] { return gradient_descent_lemma(); },
            [] { return cubic_descent_lemma(); },
            [] { return oja_psd(); },
            [] { return oja_negative(); },
            [] { return oja_noiseless(20); },
            [] { return exact_curvature_examples(); },
            [] { return curvature_step_descent(); }};
  if (suite == "solvers")
    return {[] { return parameter_examples(); },
            [] { return parameter_fidelity(); },
            [] { return horizon_zero(); },
            [] { return sgd_hvp_rvr_noiseless_quadratic(); },
            [] { return cubic_rvr_noiseless_descent(); },
            [] { return sosp_cubic_noiseless_quadratic(); },
            [] { return sosp_hvp_convex_no_certificates(); },
            [] { return sgd_hvp_rvr_lambda_sum_success(); },
            [] { return sgd_hvp_rvr_telescoped_descent(); },
            [] { return sgd_hvp_rvr_ledger_budget(); },
            [] { return output_uniformity(); },
            [] { return sosp_hvp_quality(10); },
            [] { return sosp_cubic_quality(10); }};
  if (suite == "hard_instances")
    return {[] { return component_examples(); },
            [] { return chain_examples(); },
            [] { return prog_examples(); },
            [] { return large_gradient_audit(); },
            [] { return gamma_eigenvalue_audit(); },
            [] { return tridiagonal_audit(); },
            [] { return component_bounds_audit(); },
            [] { return scaled_eps_audit(); },
            [] { return scaled_gamma_audit(); },
            [] { return zero_chain_support(); },
            [] { return zero_chain_reveal_rate(); },
            [] { return zero_chain_moments(); },
            [] { return gamma_gradient_noiseless(); },
            [] { return chain_finite_differences(); },
            [] { return zero_respecting_deterministic(); },
            [] { return discovery_time_geometric(); },
            [] { return progress_deadline_failures(); },
            [] { return progress_median(); },
            [] { return scaled_eps_progress(); }};
  throw ConfigError("unknown suite: " + suite);
}

}  // namespace

const std::vector<std::string>& suite_names() {
  static const std::vector<std::string> names{"core", "hvp_rvr", "subproblems", "solvers", "hard_instances"};
  return names;
}

std::vector<PropertyResult> run_suite(const std::string& name) {
  std::vector<PropertyResult> out;
  for (const Check& c : checks_for(name)) {
    PropertyResult r;
    try {
      r = c();
    } catch (const std::exception& e) {
      r = detail::failed("unnamed", e);
    }
    r.suite = name;
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace sosp
