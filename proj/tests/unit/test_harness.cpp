#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "check.hpp"
#include "sosp/errors.hpp"
#include "sosp/harness.hpp"

using namespace sosp;

namespace {

ExperimentConfig quick_sweep() {
  ExperimentConfig c;
  c.command = Command::sweep;
  c.instance.problem = "lambda_sum";
  c.instance.dim = 3;
  c.solver.algorithms = {"sgd", "sgd_hvp_rvr"};
  c.eps_grid = {0.4, 0.2};
  c.replications = 3;
  c.seed = 5;
  return c;
}

std::string read_all(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_SUITE("harness") {
  TEST_CASE("config round-trips losslessly") {
    ExperimentConfig c = quick_sweep();
    CHECK(parse_config(to_json_string(c)) == c);

    c.instance.delta = 3.25;
    c.instance.l1 = 0.1 + 0.2;
    c.instance.l2 = 1e-300;
    c.instance.sigma2_as = 0.7;
    c.instance.mode = "n_point";
    c.instance.points = 3;
    c.instance.noise = "gaussian";
    c.instance.seed = 18446744073709551615ull;
    c.instance.options = {{"center", 0.25}, {"first_center", 0.8}};
    c.solver.gamma = 1.0 / 3.0;
    c.solver.overrides.eta = 0.125;
    c.solver.overrides.T = 1234;
    c.solver.overrides.n2 = 9;
    c.solver.query_cap = 77;
    c.solver.success_threshold = 0.05;
    c.solver.stop_at_first_passage = true;
    c.eps_grid = {0.3, 0.1, 1e-7};
    c.seed = 9007199254740993ull;
    c.output = "out dir/\"quoted\"";
    c.lowerbound = {"gamma_chain", 12, 0.3, 0.05, true, 4096};
    c.suites = {"core", "solvers"};
    c.record_wall_time = true;
    const ExperimentConfig back = parse_config(to_json_string(c));
    CHECK(back == c);
    CHECK(to_json_string(back) == to_json_string(c));
  }

  TEST_CASE("invalid configs are configuration errors") {
    CHECK_THROWS_AS(parse_config("{not json"), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"eps_grid": [0.1, 0.2]})"), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"eps_grid": [0.1, 0.1]})"), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"replications": 0})"), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"bogus": 1})"), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"instance": {"problem": "rosenbrock"}})"), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"solver": {"algorithms": ["adam"]}})"), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"command": "plot"})"), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"suites": ["nope"]})"), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"seed": "x"})"), ConfigError);
    CHECK_THROWS_AS(load_config("/nonexistent/config.json"), ConfigError);
  }

  TEST_CASE("every problem family builds a usable instance") {
    for (std::string name : {"quadratic", "lambda_sum", "saddle_chain", "scaled_ramp", "logistic_erm",
                             "quadratic_finite_sum", "eps_chain", "gamma_chain"}) {
      CAPTURE(name);
      InstanceSpec s;
      s.problem = name;
      s.dim = 4;
      s.seed = 3;
      if (name == "gamma_chain") s.options["gamma"] = 5e-4;  // must stay below L1 / (5 l1)
      // The chain constructions need a small eps to fit more than two links into delta = 100.
      const double eps = name.find("chain") != std::string::npos && name != "saddle_chain" ? 0.01 : 0.1;
      const ProblemInstance inst = build_instance(s, eps);
      CHECK(inst.dim() >= 1);
      CHECK(std::isfinite(inst.regularity.delta));
      CHECK(inst.regularity.l1 > 0.0);
      CHECK(inst.regularity.l2 > 0.0);
      auto o = inst.make_oracle(1);
      const Vec g = o->query_grad(Vec::Zero(inst.dim()));
      CHECK(g.allFinite());
      CHECK(o->ledger().grad == 1);
    }
  }

  TEST_CASE("regularity overrides and default curvature tolerance") {
    InstanceSpec s;
    s.dim = 2;
    s.l2 = 4.0;
    const ProblemInstance inst = build_instance(s, 0.25);
    CHECK(inst.regularity.l2 == 4.0);
    SolverSpec sv;
    CHECK(resolve_gamma(sv, inst, 0.25) == doctest::Approx(1.0));
    sv.gamma = 0.3;
    CHECK(resolve_gamma(sv, inst, 0.25) == 0.3);
  }

  TEST_CASE("slope fit") {
    std::vector<std::pair<double, double>> line;
    for (double e : {0.2, 0.1, 0.05, 0.025}) line.emplace_back(std::log(e), std::log(7.0 * std::pow(e, -3.0)));
    const SlopeFit f = fit_slope(line);
    CHECK(f.slope == doctest::Approx(-3.0).epsilon(1e-12));
    CHECK(f.intercept == doctest::Approx(std::log(7.0)).epsilon(1e-12));
    CHECK(f.r_squared == doctest::Approx(1.0));
    const SlopeFit g = fit_slope({{0.0, 1.0}, {1.0, 3.0}, {2.0, 1.5}, {3.0, 0.0}});
    CHECK(g.r_squared >= 0.0);
    CHECK(g.r_squared <= 1.0);
    CHECK(std::isnan(fit_slope({{0.0, 1.0}}).slope));
  }

  TEST_CASE("sweep CSV schema") {
    const auto& cols = csv_columns();
    for (const char* c : {"command", "algorithm", "eps", "gamma", "seed", "rep", "queries_grad", "queries_hvp",
                          "queries_hess", "grad_norm_out", "lambda_min_out", "success", "wall_ms"})
      CHECK(std::find(cols.begin(), cols.end(), c) != cols.end());
    const std::string csv = sweep_csv({});
    CHECK(csv.substr(0, csv.find('\n')) ==
          "command,algorithm,eps,gamma,seed,rep,queries_grad,queries_hvp,queries_hess,grad_norm_out,"
          "lambda_min_out,success,wall_ms,queries_total,queries_to_success,horizon,mode,status");
  }

  TEST_CASE("sweeps are byte-identical across runs and worker counts") {
    const ExperimentConfig c = quick_sweep();
    ::setenv("SOSP_WORKERS", "1", 1);
    const SweepReport a = run_sweep(c);
    ::setenv("SOSP_WORKERS", "3", 1);
    const SweepReport b = run_sweep(c);
    ::unsetenv("SOSP_WORKERS");
    CHECK(sweep_csv(a.rows) == sweep_csv(b.rows));
    CHECK(sweep_summary_json(a) == sweep_summary_json(b));
    CHECK(a.rows.size() == 2 * 3 * 2);
    // Rows ordered by grid point, then replication.
    CHECK(a.rows.front().eps == 0.4);
    CHECK(a.rows.back().eps == 0.2);
    CHECK(a.rows[0].rep == 0);
    CHECK(a.rows[2].rep == 1);
    CHECK(a.rows[0].seed == derive_seed(5, "sweep", {0, 0}));
    CHECK(a.rows[0].wall_ms == 0.0);
    CHECK(a.fits.count("sgd") == 1);
  }

  TEST_CASE("worker count comes from the environment") {
    ::unsetenv("SOSP_WORKERS");
    CHECK(worker_count() == 1);
    ::setenv("SOSP_WORKERS", "4", 1);
    CHECK(worker_count() == 4);
    ::setenv("SOSP_WORKERS", "zero", 1);
    CHECK_THROWS_AS(worker_count(), ConfigError);
    ::unsetenv("SOSP_WORKERS");
  }

  TEST_CASE("zero-noise sweep succeeds at every grid point") {
    ExperimentConfig c = quick_sweep();
    c.instance.problem = "quadratic";
    c.instance.sigma1 = c.instance.sigma2 = 0.0;
    c.eps_grid = {0.2, 0.1, 0.05, 0.025};
    c.replications = 2;
    const SweepReport r = run_sweep(c);
    for (const SweepRow& row : r.rows) {
      CHECK(row.success);
      CHECK(row.queries_to_success.has_value());
    }
  }

  TEST_CASE("grid points over the budget become warning rows") {
    ExperimentConfig c = quick_sweep();
    c.solver.query_cap = 3000;
    const SweepReport r = run_sweep(c);
    int warnings = 0;
    for (const SweepRow& row : r.rows)
      if (row.rep == -1) {
        ++warnings;
        CHECK(row.status == "budget_exceeded");
      }
    CHECK(warnings >= 1);
    CHECK_FALSE(r.warnings.empty());
  }

  TEST_CASE("lower bound with deterministic revelation") {
    ExperimentConfig c;
    c.command = Command::lowerbound;
    c.lowerbound.T = 10;
    c.lowerbound.rho = 1.0;
    c.replications = 5;
    const LowerBoundReport r = run_lowerbound(c);
    for (const auto& run : r.runs) {
      REQUIRE(run.trace.full_progress_at.has_value());
      CHECK(*run.trace.full_progress_at == 10);
    }
    CHECK(r.trajectory_csv().rfind("run_id,t,prog\n", 0) == 0);
  }

  TEST_CASE("lower bound deadline and median") {
    ExperimentConfig c;
    c.command = Command::lowerbound;
    c.lowerbound = {"eps_chain", 20, 0.01, 0.1, false, std::nullopt};
    c.replications = 500;
    const LowerBoundReport r = run_lowerbound(c);
    CHECK(r.deadline == doctest::Approx(884.87).epsilon(1e-4));
    CHECK(r.failure_fraction <= 0.2);
    CHECK(r.median_full_progress >= 0.8 * r.reference);

    ExperimentConfig s;
    s.command = Command::lowerbound;
    s.lowerbound.scaled = true;
    s.instance.delta = 100.0;
    s.eps_grid = {0.01};
    s.replications = 50;
    const LowerBoundReport scaled = run_lowerbound(s);
    CHECK(scaled.T > 1);
    CHECK(scaled.median_full_progress >= 0.8 * scaled.reference);
  }

  TEST_CASE("verify reports and rejects unknown suites") {
    const VerifyReport r = run_verify({"core"});
    CHECK(r.all_passed());
    CHECK(r.json().find("\"passed\": true") != std::string::npos);
    CHECK_THROWS_AS(run_verify({"bogus"}), ConfigError);
  }

  TEST_CASE("solve writes a reproducible manifest") {
    ExperimentConfig c;
    c.instance.dim = 3;
    c.solver.algorithms = {"sgd_hvp_rvr", "sosp_cubic"};
    c.eps_grid = {0.3};
    c.seed = 11;
    const SolveReport a = run_solve(c), b = run_solve(c);
    CHECK(a.manifest_json == b.manifest_json);
    CHECK(a.trajectory_csv == b.trajectory_csv);
    CHECK(a.runs.size() == 2);
    CHECK(a.manifest_json.find("\"version\"") != std::string::npos);
    CHECK(a.manifest_json.find("\"seed\": 11") != std::string::npos);
    CHECK(a.trajectory_csv.rfind("algorithm,t,value,grad_norm\n", 0) == 0);
    CHECK_FALSE(version_string().empty());

    const auto dir = std::filesystem::temp_directory_path() / "sosp_solve_test";
    write_file(dir.string(), "manifest.json", a.manifest_json);
    CHECK(read_all(dir / "manifest.json") == a.manifest_json);
    std::filesystem::remove_all(dir);
  }
}
