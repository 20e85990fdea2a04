#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <limits>
#include <mutex>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "sosp/errors.hpp"
#include "sosp/harness.hpp"
#include "sosp/zero_chain.hpp"

namespace sosp {

using json = nlohmann::json;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::string num(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (std::isnan(v)) return "nan";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

// Runs fn(0..n-1) on up to `workers` threads; rethrows the first exception.
template <class Fn>
void parallel_for(size_t n, int workers, Fn fn) {
  std::atomic<size_t> next{0};
  std::exception_ptr error;
  std::mutex mu;
  auto body = [&] {
    for (size_t k; (k = next++) < n;) {
      try {
        fn(k);
      } catch (...) {
        std::lock_guard<std::mutex> lock(mu);
        if (!error) error = std::current_exception();
        next = n;
      }
    }
  };
  const int threads = int(std::min<size_t>(size_t(std::max(1, workers)), n));
  if (threads <= 1) {
    body();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(body);
    for (auto& t : pool) t.join();
  }
  if (error) std::rethrow_exception(error);
}

// Median with +inf for runs that never succeeded.
double median_inf(std::vector<double> v) {
  if (v.empty()) return kInf;
  std::sort(v.begin(), v.end());
  const size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

bool needs_curvature(Algorithm a) { return a == Algorithm::sosp_hvp || a == Algorithm::sosp_cubic; }

json ledger_json(const QueryLedger& l) {
  return {{"grad", l.grad}, {"hvp", l.hvp}, {"hess", l.hess}, {"value", l.value}, {"total", l.total()}};
}

json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

}  // namespace

int worker_count() {
  const char* env = std::getenv("SOSP_WORKERS");
  if (!env || !*env) return 1;
  char* end = nullptr;
  const long v = std::strtol(env, &end, 10);
  if (*end != '\0' || v < 1 || v > 1024) throw ConfigError(std::string("SOSP_WORKERS must be an integer in [1, 1024]"));
  return int(v);
}

SlopeFit fit_slope(const std::vector<std::pair<double, double>>& pts) {
  SlopeFit f;
  f.points = pts;
  const size_t n = pts.size();
  if (n < 2) {
    f.slope = f.intercept = std::numeric_limits<double>::quiet_NaN();
    return f;
  }
  double mx = 0, my = 0;
  for (const auto& [x, y] : pts) mx += x, my += y;
  mx /= double(n), my /= double(n);
  double sxx = 0, sxy = 0, syy = 0;
  for (const auto& [x, y] : pts) {
    sxx += (x - mx) * (x - mx);
    sxy += (x - mx) * (y - my);
    syy += (y - my) * (y - my);
  }
  if (sxx == 0.0) throw ContractError("fit_slope: all abscissae coincide");
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  f.r_squared = syy == 0.0 ? 1.0 : std::clamp(sxy * sxy / (sxx * syy), 0.0, 1.0);
  return f;
}

const std::vector<std::string>& csv_columns() {
  static const std::vector<std::string> c{
      "command",       "algorithm",      "eps",     "gamma",        "seed",         "rep",
      "queries_grad",  "queries_hvp",    "queries_hess", "grad_norm_out", "lambda_min_out", "success",
      "wall_ms",       "queries_total",  "queries_to_success", "horizon", "mode",      "status"};
  return c;
}

std::string sweep_csv(const std::vector<SweepRow>& rows) {
  std::ostringstream out;
  const auto& cols = csv_columns();
  for (size_t k = 0; k < cols.size(); ++k) out << (k ? "," : "") << cols[k];
  out << "\n";
  for (const SweepRow& r : rows) {
    out << r.command << ',' << r.algorithm << ',' << num(r.eps) << ',' << num(r.gamma) << ',' << r.seed << ','
        << r.rep << ',' << r.ledger.grad << ',' << r.ledger.hvp << ',' << r.ledger.hess << ','
        << num(r.grad_norm_out) << ',' << num(r.lambda_min_out) << ',' << (r.success ? 1 : 0) << ','
        << num(r.wall_ms) << ',' << r.ledger.total() << ','
        << (r.queries_to_success ? std::to_string(*r.queries_to_success) : "inf") << ',' << r.horizon << ','
        << r.mode << ',' << r.status << "\n";
  }
  return out.str();
}

std::string sweep_summary_json(const SweepReport& r) {
  json fits = json::object();
  for (const auto& [alg, f] : r.fits) {
    json pts = json::array();
    for (const auto& [x, y] : f.points) pts.push_back({x, y});
    fits[alg] = {{"slope", finite_or_null(f.slope)},
                 {"intercept", finite_or_null(f.intercept)},
                 {"r_squared", f.r_squared},
                 {"points", pts}};
  }
  json med = json::object();
  for (const auto& [alg, m] : r.medians) {
    json a = json::array();
    for (double v : m) a.push_back(finite_or_null(v));
    med[alg] = a;
  }
  return json{{"fits", fits}, {"medians", med}, {"warnings", r.warnings}}.dump(2);
}

SweepReport run_sweep(const ExperimentConfig& cfg) {
  cfg.validate();
  const size_t ne = cfg.eps_grid.size(), nr = size_t(cfg.replications), na = cfg.solver.algorithms.size();
  std::vector<Algorithm> algs;
  for (const auto& a : cfg.solver.algorithms) algs.push_back(algorithm_from_string(a));

  std::vector<ProblemInstance> instances;
  for (double e : cfg.eps_grid) instances.push_back(build_instance(cfg.instance, e));

  SweepReport rep;
  // Budget pre-check per (algorithm, grid point); refused points get one warning row.
  std::vector<std::vector<bool>> runnable(na, std::vector<bool>(ne, true));
  std::vector<SweepRow> warn_rows;
  for (size_t i = 0; i < ne; ++i) {
    for (size_t a = 0; a < na; ++a) {
      const SolverParams sp = solver_params(cfg.solver, instances[i], cfg.eps_grid[i]);
      double cost = 0.0;
      try {
        cost = expected_cost(algs[a], instances[i], sp);
      } catch (const BudgetError& e) {
        cost = e.required;
      }
      if (cost <= double(sp.query_cap)) continue;
      runnable[a][i] = false;
      SweepRow w;
      w.algorithm = cfg.solver.algorithms[a];
      w.eps = cfg.eps_grid[i];
      w.gamma = *sp.gamma;
      w.rep = -1;
      w.mode = sp.overrides.any() ? "tuned" : "theory";
      w.status = "budget_exceeded";
      warn_rows.push_back(w);
      rep.warnings.push_back(w.algorithm + " at eps " + num(w.eps) + ": expected " + num(cost) +
                             " queries exceeds the cap " + std::to_string(sp.query_cap));
    }
  }

  // Rows indexed by (eps, rep, algorithm) so the merge order is fixed.
  std::vector<SweepRow> rows(ne * nr * na);
  std::vector<char> used(rows.size(), 0);
  std::vector<size_t> jobs;
  for (size_t i = 0; i < ne; ++i)
    for (size_t r = 0; r < nr; ++r)
      for (size_t a = 0; a < na; ++a)
        if (runnable[a][i]) jobs.push_back((i * nr + r) * na + a);

  parallel_for(jobs.size(), worker_count(), [&](size_t j) {
    const size_t idx = jobs[j];
    const size_t a = idx % na, r = (idx / na) % nr, i = idx / (na * nr);
    const ProblemInstance& inst = instances[i];
    SolverParams sp = solver_params(cfg.solver, inst, cfg.eps_grid[i]);
    sp.keep_iterates = 2;
    SweepRow row;
    row.algorithm = cfg.solver.algorithms[a];
    row.eps = cfg.eps_grid[i];
    row.gamma = *sp.gamma;
    row.seed = derive_seed(cfg.seed, "sweep", {uint64_t(i), uint64_t(r)});
    row.rep = int(r);
    row.mode = sp.overrides.any() ? "tuned" : "theory";
    const auto start = std::chrono::steady_clock::now();
    try {
      const RunResult res = run_algorithm(algs[a], inst, sp, row.seed);
      row.ledger = res.ledger;
      row.grad_norm_out = res.grad_norm_exact;
      row.lambda_min_out = res.lambda_min_exact;
      row.horizon = res.horizon;
      row.queries_to_success = res.first_passage_queries;
      const double thr = sp.success_threshold > 0.0 ? sp.success_threshold : sp.epsilon;
      row.success = res.grad_norm_exact <= thr && (!needs_curvature(algs[a]) || res.lambda_min_exact >= -*sp.gamma);
    } catch (const BudgetError&) {
      row.status = "budget_exceeded";
    }
    if (cfg.record_wall_time)
      row.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    rows[idx] = row;
    used[idx] = 1;
  });

  // Warning rows first within their grid point.
  for (size_t i = 0; i < ne; ++i) {
    for (const SweepRow& w : warn_rows)
      if (w.eps == cfg.eps_grid[i]) rep.rows.push_back(w);
    for (size_t k = i * nr * na; k < (i + 1) * nr * na; ++k)
      if (used[k]) rep.rows.push_back(rows[k]);
  }

  for (size_t a = 0; a < na; ++a) {
    const std::string& name = cfg.solver.algorithms[a];
    std::vector<double> meds(ne, kInf);
    std::vector<std::pair<double, double>> pts;
    for (size_t i = 0; i < ne; ++i) {
      if (!runnable[a][i]) {
        meds[i] = std::numeric_limits<double>::quiet_NaN();
        continue;
      }
      std::vector<double> q;
      for (size_t r = 0; r < nr; ++r) {
        const SweepRow& row = rows[(i * nr + r) * na + a];
        q.push_back(row.queries_to_success ? double(*row.queries_to_success) : kInf);
      }
      meds[i] = median_inf(q);
      if (std::isfinite(meds[i]) && meds[i] > 0.0) pts.emplace_back(std::log(cfg.eps_grid[i]), std::log(meds[i]));
      else rep.warnings.push_back(name + " at eps " + num(cfg.eps_grid[i]) + ": median queries-to-success is infinite");
    }
    for (size_t i = 1; i < ne; ++i)
      if (std::isfinite(meds[i]) && std::isfinite(meds[i - 1]) && meds[i] < meds[i - 1])
        rep.warnings.push_back(name + ": median queries-to-success decreases from eps " + num(cfg.eps_grid[i - 1]) +
                               " to eps " + num(cfg.eps_grid[i]));
    rep.medians[name] = meds;
    rep.fits[name] = fit_slope(pts);
    if (pts.size() < 2) rep.warnings.push_back(name + ": fewer than two finite grid points, no slope");
  }
  return rep;
}

// ---- lower bound

std::string LowerBoundReport::csv() const {
  std::ostringstream out;
  out << "command,T,rho,seed,rep,queries,final_progress,full_progress_at,deadline,deadline_failure\n";
  for (const auto& r : runs)
    out << "lowerbound," << T << ',' << num(rho) << ',' << r.seed << ',' << r.run_id << ',' << r.trace.queries << ','
        << r.trace.final_progress << ','
        << (r.trace.full_progress_at ? std::to_string(*r.trace.full_progress_at) : "inf") << ',' << num(deadline)
        << ',' << (r.deadline_failure ? 1 : 0) << "\n";
  return out.str();
}

std::string LowerBoundReport::trajectory_csv() const {
  std::ostringstream out;
  out << "run_id,t,prog\n";
  for (const auto& r : runs) {
    out << r.run_id << ",0,0\n";
    for (const auto& [t, p] : r.trace.reveals) out << r.run_id << ',' << t << ',' << p << "\n";
  }
  return out.str();
}

std::string LowerBoundReport::summary_json() const {
  return json{{"T", T},
              {"rho", rho},
              {"delta", delta},
              {"runs", runs.size()},
              {"deadline", deadline},
              {"reference", reference},
              {"failure_fraction", failure_fraction},
              {"median_full_progress", finite_or_null(median_full_progress)}}
      .dump(2);
}

LowerBoundReport run_lowerbound(const ExperimentConfig& cfg) {
  cfg.validate();
  const LowerBoundSpec& lb = cfg.lowerbound;
  const ChainKind kind = lb.kind == "gamma_chain" ? ChainKind::gamma_chain : ChainKind::eps_chain;
  ChainInstance inst;
  if (lb.scaled) {
    const InstanceSpec& s = cfg.instance;
    const double eps = cfg.eps_grid.front(), l2 = s.l2.value_or(1.0);
    inst = kind == ChainKind::eps_chain
               ? build_eps_hard_instance(eps, s.l1.value_or(1.0), l2, s.sigma1, s.sigma2, s.delta.value_or(100.0))
               : build_gamma_hard_instance(cfg.solver.gamma.value_or(std::sqrt(l2 * eps)), s.l1.value_or(1.0), l2,
                                           s.sigma2, s.delta.value_or(100.0));
  } else {
    inst = make_unscaled_chain_instance(kind, lb.T, lb.rho);
  }
  LowerBoundReport rep;
  rep.T = inst.chain->length();
  rep.rho = inst.rho;
  rep.delta = lb.delta;
  rep.deadline = progress_deadline(rep.T, rep.rho, lb.delta);
  rep.reference = (rep.T - 1) / (2.0 * rep.rho);
  const uint64_t cap = lb.max_queries ? *lb.max_queries : uint64_t(std::ceil(100.0 * rep.T / rep.rho));

  rep.runs.resize(size_t(cfg.replications));
  parallel_for(rep.runs.size(), worker_count(), [&](size_t k) {
    LowerBoundRun& r = rep.runs[k];
    r.run_id = int(k);
    r.seed = derive_seed(cfg.seed, "lowerbound", {uint64_t(k)});
    ZeroChainOracle oracle(inst, r.seed);
    r.trace = zero_respecting_run(oracle, cap);
    r.deadline_failure = r.trace.full_progress_at && double(*r.trace.full_progress_at) <= rep.deadline;
  });
  std::vector<double> times;
  int fails = 0;
  for (const auto& r : rep.runs) {
    fails += r.deadline_failure;
    times.push_back(r.trace.full_progress_at ? double(*r.trace.full_progress_at) : kInf);
  }
  rep.failure_fraction = double(fails) / double(rep.runs.size());
  rep.median_full_progress = median_inf(times);
  return rep;
}

// ---- verify

bool VerifyReport::all_passed() const {
  return std::all_of(results.begin(), results.end(), [](const PropertyResult& r) { return r.passed; });
}

std::string VerifyReport::json() const {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& r : results)
    arr.push_back({{"suite", r.suite},
                   {"name", r.name},
                   {"passed", r.passed},
                   {"value", finite_or_null(r.value)},
                   {"bound", finite_or_null(r.bound)},
                   {"margin", finite_or_null(r.margin)},
                   {"detail", r.detail}});
  return nlohmann::json{{"passed", all_passed()}, {"results", arr}}.dump(2);
}

VerifyReport run_verify(const std::vector<std::string>& suites) {
  std::vector<std::string> names;
  for (const auto& s : suites) {
    if (s == "all") names.insert(names.end(), suite_names().begin(), suite_names().end());
    else names.push_back(s);
  }
  for (const auto& s : names)
    if (std::find(suite_names().begin(), suite_names().end(), s) == suite_names().end())
      throw ConfigError("unknown suite: " + s);
  VerifyReport rep;
  for (const auto& s : names) {
    auto res = run_suite(s);
    rep.results.insert(rep.results.end(), res.begin(), res.end());
  }
  return rep;
}

// ---- solve

SolveReport run_solve(const ExperimentConfig& cfg) {
  cfg.validate();
  const double eps = cfg.eps_grid.front();
  const ProblemInstance inst = build_instance(cfg.instance, eps);
  const SolverParams sp = solver_params(cfg.solver, inst, eps);
  SolveReport rep;
  nlohmann::json runs = nlohmann::json::array();
  std::ostringstream traj;
  traj << "algorithm,t,value,grad_norm\n";
  for (const auto& name : cfg.solver.algorithms) {
    RunResult r = run_algorithm(algorithm_from_string(name), inst, sp, cfg.seed);
    nlohmann::json j = {{"algorithm", r.algorithm},
                        {"mode", r.tuned ? "tuned" : "theory"},
                        {"eps", eps},
                        {"gamma", *sp.gamma},
                        {"horizon", r.horizon},
                        {"output_index", r.output_index},
                        {"output", std::vector<double>(r.output.data(), r.output.data() + r.output.size())},
                        {"grad_norm_out", r.grad_norm_exact},
                        {"lambda_min_out", r.lambda_min_exact},
                        {"ledger", ledger_json(r.ledger)},
                        {"substreams", r.substreams},
                        {"first_passage_step", r.first_passage_step ? json(*r.first_passage_step) : json(nullptr)},
                        {"first_passage_queries",
                         r.first_passage_queries ? json(*r.first_passage_queries) : json(nullptr)},
                        {"params", r.params},
                        {"counters", r.counters},
                        {"notes", r.notes}};
    runs.push_back(j);
    for (size_t k = 0; k < r.iterates.size(); ++k)
      traj << r.algorithm << ',' << r.iterate_index[k] << ',' << num(inst.objective->value(r.iterates[k])) << ','
           << num(inst.objective->gradient(r.iterates[k]).norm()) << "\n";
    rep.runs.push_back(std::move(r));
  }
  rep.manifest_json = nlohmann::json{{"version", version_string()},
                                     {"seed", cfg.seed},
                                     {"config", nlohmann::json::parse(to_json_string(cfg))},
                                     {"runs", runs}}
                          .dump(2);
  rep.trajectory_csv = traj.str();
  return rep;
}

}  // namespace sosp
