#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "sosp/oracle.hpp"
#include "sosp/properties.hpp"
#include "sosp/solvers.hpp"
#include "sosp/zero_chain.hpp"

namespace sosp {

enum class Command { solve, sweep, lowerbound, verify };
std::string to_string(Command c);
Command command_from_string(const std::string& s);

// Problem family plus its noise model.  Regularity fields override the
// values a family derives for itself; chain families read them as targets.
struct InstanceSpec {
  std::string problem = "lambda_sum";  // quadratic, lambda_sum, saddle_chain, scaled_ramp, logistic_erm,
                                       // quadratic_finite_sum, eps_chain, gamma_chain
  int dim = 10;
  std::optional<double> delta, l1, l2;
  double sigma1 = 1.0;
  double sigma2 = 1.0;
  std::optional<double> sigma2_as;
  std::string mode = "single_point";  // or n_point
  int points = 2;                     // query points in n_point mode
  std::string noise = "rank_one";     // or gaussian
  uint64_t seed = 0;                  // seed for random problem data
  std::map<std::string, double> options;
  friend bool operator==(const InstanceSpec&, const InstanceSpec&) = default;
};

struct SolverSpec {
  std::vector<std::string> algorithms{"sgd_hvp_rvr"};
  std::optional<double> gamma;  // default sqrt(L2 eps)
  Overrides overrides;
  uint64_t query_cap = 100000000;
  double success_threshold = 0.0;
  bool stop_at_first_passage = false;
  friend bool operator==(const SolverSpec&, const SolverSpec&) = default;
};

struct LowerBoundSpec {
  std::string kind = "eps_chain";  // or gamma_chain
  int T = 20;
  double rho = 0.01;
  double delta = 0.1;   // failure probability of the deadline
  bool scaled = false;  // scaled hard instance built from `instance` and eps_grid[0]
  std::optional<uint64_t> max_queries;  // default 100 T / rho
  friend bool operator==(const LowerBoundSpec&, const LowerBoundSpec&) = default;
};

struct ExperimentConfig {
  Command command = Command::solve;
  InstanceSpec instance;
  SolverSpec solver;
  std::vector<double> eps_grid{0.1};
  int replications = 1;
  uint64_t seed = 42;
  std::string output = ".";
  LowerBoundSpec lowerbound;
  std::vector<std::string> suites{"all"};
  bool record_wall_time = false;  // wall_ms is 0 unless set, so CSVs stay byte-identical
  void validate() const;          // throws ConfigError
  friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

std::string to_json_string(const ExperimentConfig& c, int indent = 2);
// Throws ConfigError on malformed JSON, unknown keys or invalid values.
ExperimentConfig parse_config(const std::string& json_text);
ExperimentConfig load_config(const std::string& path);

ProblemInstance build_instance(const InstanceSpec& spec, double eps);
// Curvature tolerance for a grid point: the configured gamma or sqrt(L2 eps).
double resolve_gamma(const SolverSpec& s, const ProblemInstance& inst, double eps);
SolverParams solver_params(const SolverSpec& s, const ProblemInstance& inst, double eps);

// git-describe output captured at configure time.
std::string version_string();

// ---- sweeps

struct SweepRow {
  std::string command = "sweep";
  std::string algorithm;
  double eps = 0.0, gamma = 0.0;
  uint64_t seed = 0;
  int rep = 0;  // -1 marks a warning row
  QueryLedger ledger;
  double grad_norm_out = 0.0, lambda_min_out = 0.0;
  bool success = false;
  double wall_ms = 0.0;
  std::optional<uint64_t> queries_to_success;
  uint64_t horizon = 0;
  std::string mode = "theory";  // or tuned
  std::string status = "ok";    // or budget_exceeded
};

struct SlopeFit {
  double slope = 0.0, intercept = 0.0, r_squared = 0.0;
  std::vector<std::pair<double, double>> points;  // (log eps, log median queries)
};

// Least squares line through the points; r_squared clamped to [0, 1].
SlopeFit fit_slope(const std::vector<std::pair<double, double>>& points);

struct SweepReport {
  std::vector<SweepRow> rows;
  std::map<std::string, SlopeFit> fits;                     // per algorithm
  std::map<std::string, std::vector<double>> medians;       // per algorithm, per grid point
  std::vector<std::string> warnings;
};

// Column order of every solver CSV.
const std::vector<std::string>& csv_columns();
std::string sweep_csv(const std::vector<SweepRow>& rows);
std::string sweep_summary_json(const SweepReport& r);

// Worker count from SOSP_WORKERS (default 1).
int worker_count();

SweepReport run_sweep(const ExperimentConfig& cfg);

// ---- lower-bound simulations

struct LowerBoundRun {
  int run_id = 0;
  uint64_t seed = 0;
  ProgressTrace trace;
  bool deadline_failure = false;  // full progress at or before the deadline
};

struct LowerBoundReport {
  int T = 0;
  double rho = 0.0, delta = 0.0;
  double deadline = 0.0;          // (T - ln(1/delta)) / (2 rho)
  double reference = 0.0;         // (T - 1) / (2 rho)
  double failure_fraction = 0.0;
  double median_full_progress = 0.0;  // inf when fewer than half the runs finish
  std::vector<LowerBoundRun> runs;
  std::string csv() const;             // one row per run
  std::string trajectory_csv() const;  // run_id, t, prog
  std::string summary_json() const;
};

LowerBoundReport run_lowerbound(const ExperimentConfig& cfg);

// ---- verification

struct VerifyReport {
  std::vector<PropertyResult> results;
  bool all_passed() const;
  std::string json() const;
};

// Suite names or "all"; unknown names throw ConfigError.
VerifyReport run_verify(const std::vector<std::string>& suites);

// ---- single runs

struct SolveReport {
  std::vector<RunResult> runs;  // one per configured algorithm at eps_grid[0]
  std::string manifest_json;
  std::string trajectory_csv;
};

SolveReport run_solve(const ExperimentConfig& cfg);

// Writes text to dir/name, creating dir.
void write_file(const std::string& dir, const std::string& name, const std::string& text);

}  // namespace sosp
