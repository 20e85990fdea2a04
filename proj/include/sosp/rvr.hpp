#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "sosp/oracle.hpp"

namespace sosp {

struct RvrConfig {
  double epsilon = 0.1;
  double reset_prob = 1.0;  // b, may change from call to call
  double sigma1 = 0.0;
  double sigma2 = 0.0;
  double l2 = 1.0;
  void validate() const;
  // ceil(5 sigma1^2 / eps^2), or 1 for an exact gradient channel.
  uint64_t fresh_batch() const;
  // ceil(5 (sigma2^2 + L2 eps) / (b eps^2) * dx^2); throws ConfigError above 1e9.
  uint64_t path_steps(double dx_norm) const;
};

// Carry-over of the recursion; g_prev empty means no estimate yet.
struct EstimatorState {
  std::optional<Vec> x_prev;
  std::optional<Vec> g_prev;
  bool has_estimate() const { return g_prev.has_value(); }
};

struct RvrCallInfo {
  bool fresh = false;
  uint64_t path_steps = 0;
  uint64_t queries = 0;
};

// One call of the recursive estimator at x.  The reset coin is drawn from
// `coin_rng`; oracle randomness comes from the oracle's own streams.
Vec rvr_estimate(EstimatorState& state, const Vec& x, const RvrConfig& cfg, StochasticOracle& oracle,
                 CounterRng& coin_rng, RvrCallInfo* info = nullptr);

// 6 (1 + b sigma1^2/eps^2 + (sigma2^2 + L2 eps) dx^2 / (b eps^2)).
double expected_query_budget(const RvrConfig& cfg, double dx_norm);

// Produces the next query point from the current point and estimate.
using TrajectoryStep = std::function<Vec(const Vec& x, const Vec& g)>;

struct ErrorSuiteResult {
  std::vector<double> mean_sq_error;  // per step, averaged over replications
  std::vector<double> mean_queries;   // per step
  double overall_mean = 0.0;          // over all steps and replications
  double overall_stderr = 0.0;        // across replications
  double max_step_mean = 0.0;
};

// Runs the estimator along an adapted trajectory starting at x0 and measures
// |g_t - grad F(x_t)|^2 against the exact gradient.
ErrorSuiteResult estimator_error_suite(const ProblemInstance& inst, const Vec& x0, const TrajectoryStep& step,
                                       const RvrConfig& cfg, int steps, int replications, uint64_t seed);

}  // namespace sosp
