#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "sosp/oracle.hpp"

namespace sosp {

enum class Algorithm { sgd, sgd_hvp_rvr, cubic_rvr, sosp_hvp, sosp_cubic };
std::string to_string(Algorithm a);
Algorithm algorithm_from_string(const std::string& s);

// Named replacements for derived parameters ("tuned" mode).
struct Overrides {
  std::optional<double> eta, b, M, p, b_g, b_H, delta;
  std::optional<uint64_t> T, n_H, n1, n2;
  bool any() const;
  friend bool operator==(const Overrides&, const Overrides&) = default;
};

struct SolverParams {
  double epsilon = 0.1;
  std::optional<double> gamma;
  Overrides overrides;
  uint64_t query_cap = 100000000;  // refuse runs whose expected cost exceeds this
  double success_threshold = 0.0;  // first-passage threshold on |grad F|; 0 = epsilon
  bool stop_at_first_passage = false;
  int keep_iterates = 10000;  // down-sampled trajectory size
  std::optional<Vec> x0;      // default: origin
};

struct SgdParams {
  double eta = 0.0;
  uint64_t T = 0;
};
struct SgdHvpRvrParams {
  double eta = 0.0, b = 1.0;
  uint64_t T = 0;
};
struct CubicRvrParams {
  double M = 0.0, eta = 0.0, b = 1.0;
  uint64_t T = 0, n_H = 0;
};
struct SospHvpParams {
  double eta = 0.0, p = 0.0, b_g = 1.0, b_H = 1.0, delta = 0.0, sigma2_bar = 0.0;
  uint64_t T = 0;
};
struct SospCubicParams {
  double M = 0.0, eta = 0.0, p = 0.0, b_g = 1.0, b_H = 1.0;
  uint64_t T = 0, n1 = 0, n2 = 0;
};

// eta = min{1/(2 L1), eps^2/(2 L1 s1^2)}, T = ceil(4 Delta/(eta eps^2)).
SgdParams sgd_theory_params(const Regularity& r, const NoiseParams& n, double eps);
SgdHvpRvrParams sgd_hvp_rvr_params(const Regularity& r, const NoiseParams& n, const SolverParams& sp);
CubicRvrParams cubic_rvr_params(const Regularity& r, const NoiseParams& n, int dim, const SolverParams& sp);
SospHvpParams sosp_hvp_params(const Regularity& r, const NoiseParams& n, double sigma2_bar, const SolverParams& sp);
SospCubicParams sosp_cubic_params(const Regularity& r, const NoiseParams& n, int dim, const SolverParams& sp);

// Expected query counts used by the budget pre-check.
double expected_cost(Algorithm a, const ProblemInstance& inst, const SolverParams& sp);

struct RunResult {
  std::string algorithm;
  bool tuned = false;  // any override applied
  Vec output;
  QueryLedger ledger;
  uint64_t substreams = 0;
  double grad_norm_exact = 0.0;
  double lambda_min_exact = 0.0;
  uint64_t horizon = 0;       // T
  uint64_t output_index = 0;  // index of the returned iterate
  std::vector<Vec> iterates;  // down-sampled
  std::vector<uint64_t> iterate_index;
  uint64_t seed = 0;
  std::optional<uint64_t> first_passage_step;
  std::optional<uint64_t> first_passage_queries;  // ledger total when the iterate was produced
  std::map<std::string, double> params;
  std::map<std::string, double> counters;  // algorithm events (resets, certificates, ...)
  std::vector<std::string> notes;
};

RunResult sgd_baseline(const ProblemInstance& inst, double epsilon, double eta, uint64_t horizon, uint64_t seed,
                       const SolverParams& sp = {});
RunResult sgd_hvp_rvr(const ProblemInstance& inst, const SolverParams& sp, uint64_t seed);
RunResult cubic_rvr(const ProblemInstance& inst, const SolverParams& sp, uint64_t seed);
RunResult sosp_hvp(const ProblemInstance& inst, const SolverParams& sp, uint64_t seed);
RunResult sosp_cubic(const ProblemInstance& inst, const SolverParams& sp, uint64_t seed);

// Dispatch; the SGD baseline uses its theory parameters unless eta/T are overridden.
RunResult run_algorithm(Algorithm a, const ProblemInstance& inst, const SolverParams& sp, uint64_t seed);

}  // namespace sosp
