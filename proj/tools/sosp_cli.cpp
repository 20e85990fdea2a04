// Command-line front end: solve, sweep, lowerbound, verify.
// Exit codes: 0 success, 1 property failure, 2 configuration error.

#include <cstdio>
#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "sosp/errors.hpp"
#include "sosp/harness.hpp"

namespace {

constexpr int kOk = 0, kPropertyFailure = 1, kConfigError = 2;

int do_solve(const std::string& path, std::optional<uint64_t> seed, std::optional<std::string> out) {
  sosp::ExperimentConfig cfg = sosp::load_config(path);
  if (seed) cfg.seed = *seed;
  if (out) cfg.output = *out;
  const sosp::SolveReport rep = sosp::run_solve(cfg);
  sosp::write_file(cfg.output, "manifest.json", rep.manifest_json);
  sosp::write_file(cfg.output, "trajectory.csv", rep.trajectory_csv);
  for (const auto& r : rep.runs)
    std::printf("%s: |grad F| = %.6g, lambda_min = %.6g, queries = %llu, T = %llu\n", r.algorithm.c_str(),
                r.grad_norm_exact, r.lambda_min_exact, static_cast<unsigned long long>(r.ledger.total()),
                static_cast<unsigned long long>(r.horizon));
  std::printf("wrote %s/manifest.json and %s/trajectory.csv\n", cfg.output.c_str(), cfg.output.c_str());
  return kOk;
}

int do_sweep(const std::string& path) {
  const sosp::ExperimentConfig cfg = sosp::load_config(path);
  const sosp::SweepReport rep = sosp::run_sweep(cfg);
  sosp::write_file(cfg.output, "sweep.csv", sosp::sweep_csv(rep.rows));
  sosp::write_file(cfg.output, "sweep_summary.json", sosp::sweep_summary_json(rep));
  for (const auto& [alg, f] : rep.fits)
    std::printf("%s: slope %.4f, r^2 %.4f over %zu points\n", alg.c_str(), f.slope, f.r_squared, f.points.size());
  for (const auto& w : rep.warnings) std::fprintf(stderr, "warning: %s\n", w.c_str());
  std::printf("wrote %s/sweep.csv and %s/sweep_summary.json\n", cfg.output.c_str(), cfg.output.c_str());
  return kOk;
}

int do_lowerbound(const std::string& path) {
  const sosp::ExperimentConfig cfg = sosp::load_config(path);
  const sosp::LowerBoundReport rep = sosp::run_lowerbound(cfg);
  sosp::write_file(cfg.output, "lowerbound.csv", rep.csv());
  sosp::write_file(cfg.output, "lowerbound_trajectories.csv", rep.trajectory_csv());
  sosp::write_file(cfg.output, "lowerbound_summary.json", rep.summary_json());
  std::printf("T = %d, rho = %.6g: deadline %.6g, failure fraction %.4f, median queries to full progress %.6g\n",
              rep.T, rep.rho, rep.deadline, rep.failure_fraction, rep.median_full_progress);
  return kOk;
}

int do_verify(const std::string& suite, std::optional<std::string> report) {
  const sosp::VerifyReport rep = sosp::run_verify({suite});
  for (const auto& r : rep.results)
    std::printf("%s %s/%s value=%.6g bound=%.6g %s\n", r.passed ? "PASS" : "FAIL", r.suite.c_str(), r.name.c_str(),
                r.value, r.bound, r.detail.c_str());
  if (report) {
    std::FILE* f = std::fopen(report->c_str(), "wb");
    if (!f) throw sosp::InputError("cannot write " + *report);
    const std::string text = rep.json();
    std::fwrite(text.data(), 1, text.size(), f);
    std::fclose(f);
  }
  return rep.all_passed() ? kOk : kPropertyFailure;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Stochastic second-order optimization experiments"};
  app.require_subcommand(1);

  std::string config;
  std::optional<uint64_t> seed;
  std::optional<std::string> out, report;
  std::string suite = "all";

  auto* solve = app.add_subcommand("solve", "Run the configured algorithms once at the first grid point");
  solve->add_option("--config", config, "JSON config file")->required();
  solve->add_option("--seed", seed, "Override the master seed");
  solve->add_option("--out", out, "Output directory");
  auto* sweep = app.add_subcommand("sweep", "Epsilon sweep with log-log slope fit");
  sweep->add_option("--config", config, "JSON config file")->required();
  auto* lower = app.add_subcommand("lowerbound", "Zero-respecting progress simulation");
  lower->add_option("--config", config, "JSON config file")->required();
  auto* verify = app.add_subcommand("verify", "Run property suites");
  verify->add_option("--suite", suite, "Suite name or all");
  verify->add_option("--report", report, "Write a JSON report here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfigError;
  }

  try {
    if (*solve) return do_solve(config, seed, out);
    if (*sweep) return do_sweep(config);
    if (*lower) return do_lowerbound(config);
    return do_verify(suite, report);
  } catch (const sosp::ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
  } catch (const sosp::InputError& e) {
    std::cerr << "input error: " << e.what() << "\n";
  } catch (const sosp::BudgetError& e) {
    std::cerr << "budget error: " << e.what() << " (required " << e.required << ", cap " << e.cap << ")\n";
  } catch (const sosp::ContractError& e) {
    std::cerr << "contract error: " << e.what() << "\n";
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "json error: " << e.what() << "\n";
  }
  return kConfigError;
}
