#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "sosp/errors.hpp"
#include "sosp/harness.hpp"
#include "sosp/problems.hpp"
#include "sosp/zero_chain.hpp"

#ifndef SOSP_VERSION
#define SOSP_VERSION "unknown"
#endif

namespace sosp {

using json = nlohmann::json;

std::string version_string() { return SOSP_VERSION; }

std::string to_string(Command c) {
  switch (c) {
    case Command::solve: return "solve";
    case Command::sweep: return "sweep";
    case Command::lowerbound: return "lowerbound";
    case Command::verify: return "verify";
  }
  return "solve";
}

Command command_from_string(const std::string& s) {
  for (Command c : {Command::solve, Command::sweep, Command::lowerbound, Command::verify})
    if (to_string(c) == s) return c;
  throw ConfigError("unknown command: " + s);
}

namespace {

void check_keys(const json& j, const char* where, std::initializer_list<const char*> allowed) {
  if (!j.is_object()) throw ConfigError(std::string(where) + ": expected an object");
  const std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& item : j.items())
    if (!ok.count(item.key())) throw ConfigError(std::string(where) + ": unknown key '" + item.key() + "'");
}

template <class T>
void read(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

template <class T>
void read(const json& j, const char* key, std::optional<T>& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

template <class T>
void write(json& j, const char* key, const std::optional<T>& v) {
  if (v) j[key] = *v;
}

json overrides_json(const Overrides& o) {
  json j = json::object();
  write(j, "eta", o.eta);
  write(j, "b", o.b);
  write(j, "M", o.M);
  write(j, "p", o.p);
  write(j, "b_g", o.b_g);
  write(j, "b_H", o.b_H);
  write(j, "delta", o.delta);
  write(j, "T", o.T);
  write(j, "n_H", o.n_H);
  write(j, "n1", o.n1);
  write(j, "n2", o.n2);
  return j;
}

Overrides overrides_from(const json& j) {
  check_keys(j, "solver.overrides", {"eta", "b", "M", "p", "b_g", "b_H", "delta", "T", "n_H", "n1", "n2"});
  Overrides o;
  read(j, "eta", o.eta);
  read(j, "b", o.b);
  read(j, "M", o.M);
  read(j, "p", o.p);
  read(j, "b_g", o.b_g);
  read(j, "b_H", o.b_H);
  read(j, "delta", o.delta);
  read(j, "T", o.T);
  read(j, "n_H", o.n_H);
  read(j, "n1", o.n1);
  read(j, "n2", o.n2);
  return o;
}

const std::set<std::string>& known_problems() {
  static const std::set<std::string> p{"quadratic",    "lambda_sum",           "saddle_chain", "scaled_ramp",
                                       "logistic_erm", "quadratic_finite_sum", "eps_chain",    "gamma_chain"};
  return p;
}

double opt(const InstanceSpec& s, const std::string& key, double fallback) {
  auto it = s.options.find(key);
  return it == s.options.end() ? fallback : it->second;
}

int opt_int(const InstanceSpec& s, const std::string& key, int fallback) {
  const double v = opt(s, key, fallback);
  if (v != std::floor(v) || v < 1) throw ConfigError("instance option '" + key + "' must be a positive integer");
  return int(v);
}

Vec linspace(int n, double lo, double hi) {
  if (n == 1) return Vec::Constant(1, lo);
  return Vec::LinSpaced(n, lo, hi);
}

}  // namespace

std::string to_json_string(const ExperimentConfig& c, int indent) {
  json inst = {{"problem", c.instance.problem},
               {"dim", c.instance.dim},
               {"sigma1", c.instance.sigma1},
               {"sigma2", c.instance.sigma2},
               {"mode", c.instance.mode},
               {"points", c.instance.points},
               {"noise", c.instance.noise},
               {"seed", c.instance.seed},
               {"options", c.instance.options}};
  write(inst, "delta", c.instance.delta);
  write(inst, "l1", c.instance.l1);
  write(inst, "l2", c.instance.l2);
  write(inst, "sigma2_as", c.instance.sigma2_as);

  json solver = {{"algorithms", c.solver.algorithms},
                 {"overrides", overrides_json(c.solver.overrides)},
                 {"query_cap", c.solver.query_cap},
                 {"success_threshold", c.solver.success_threshold},
                 {"stop_at_first_passage", c.solver.stop_at_first_passage}};
  write(solver, "gamma", c.solver.gamma);

  json lb = {{"kind", c.lowerbound.kind},
             {"T", c.lowerbound.T},
             {"rho", c.lowerbound.rho},
             {"delta", c.lowerbound.delta},
             {"scaled", c.lowerbound.scaled}};
  write(lb, "max_queries", c.lowerbound.max_queries);

  json j = {{"command", to_string(c.command)},
            {"instance", inst},
            {"solver", solver},
            {"eps_grid", c.eps_grid},
            {"replications", c.replications},
            {"seed", c.seed},
            {"output", c.output},
            {"lowerbound", lb},
            {"suites", c.suites},
            {"record_wall_time", c.record_wall_time}};
  return j.dump(indent);
}

ExperimentConfig parse_config(const std::string& text) {
  ExperimentConfig c;
  try {
    const json j = json::parse(text);
    check_keys(j, "config", {"command", "instance", "solver", "eps_grid", "replications", "seed", "output",
                             "lowerbound", "suites", "record_wall_time"});
    if (j.contains("command")) c.command = command_from_string(j.at("command").get<std::string>());
    if (j.contains("instance")) {
      const json& i = j.at("instance");
      check_keys(i, "instance", {"problem", "dim", "delta", "l1", "l2", "sigma1", "sigma2", "sigma2_as", "mode",
                                 "points", "noise", "seed", "options"});
      InstanceSpec& s = c.instance;
      read(i, "problem", s.problem);
      read(i, "dim", s.dim);
      read(i, "delta", s.delta);
      read(i, "l1", s.l1);
      read(i, "l2", s.l2);
      read(i, "sigma1", s.sigma1);
      read(i, "sigma2", s.sigma2);
      read(i, "sigma2_as", s.sigma2_as);
      read(i, "mode", s.mode);
      read(i, "points", s.points);
      read(i, "noise", s.noise);
      read(i, "seed", s.seed);
      read(i, "options", s.options);
    }
    if (j.contains("solver")) {
      const json& s = j.at("solver");
      check_keys(s, "solver", {"algorithms", "gamma", "overrides", "query_cap", "success_threshold",
                               "stop_at_first_passage"});
      read(s, "algorithms", c.solver.algorithms);
      read(s, "gamma", c.solver.gamma);
      if (s.contains("overrides")) c.solver.overrides = overrides_from(s.at("overrides"));
      read(s, "query_cap", c.solver.query_cap);
      read(s, "success_threshold", c.solver.success_threshold);
      read(s, "stop_at_first_passage", c.solver.stop_at_first_passage);
    }
    read(j, "eps_grid", c.eps_grid);
    read(j, "replications", c.replications);
    read(j, "seed", c.seed);
    read(j, "output", c.output);
    if (j.contains("lowerbound")) {
      const json& l = j.at("lowerbound");
      check_keys(l, "lowerbound", {"kind", "T", "rho", "delta", "scaled", "max_queries"});
      read(l, "kind", c.lowerbound.kind);
      read(l, "T", c.lowerbound.T);
      read(l, "rho", c.lowerbound.rho);
      read(l, "delta", c.lowerbound.delta);
      read(l, "scaled", c.lowerbound.scaled);
      read(l, "max_queries", c.lowerbound.max_queries);
    }
    read(j, "suites", c.suites);
    read(j, "record_wall_time", c.record_wall_time);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  c.validate();
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

void ExperimentConfig::validate() const {
  if (eps_grid.empty()) throw ConfigError("eps_grid must not be empty");
  for (size_t k = 0; k < eps_grid.size(); ++k) {
    if (!(eps_grid[k] > 0.0) || !std::isfinite(eps_grid[k])) throw ConfigError("eps_grid entries must be > 0");
    if (k > 0 && !(eps_grid[k] < eps_grid[k - 1])) throw ConfigError("eps_grid must be strictly decreasing");
  }
  if (replications < 1) throw ConfigError("replications must be >= 1");
  if (!known_problems().count(instance.problem)) throw ConfigError("unknown problem: " + instance.problem);
  if (instance.dim < 1) throw ConfigError("instance.dim must be >= 1");
  if (!(instance.sigma1 >= 0.0) || !(instance.sigma2 >= 0.0)) throw ConfigError("noise levels must be >= 0");
  if (instance.mode != "single_point" && instance.mode != "n_point")
    throw ConfigError("instance.mode must be single_point or n_point");
  if (instance.mode == "n_point" && instance.points < 2) throw ConfigError("n_point mode needs points >= 2");
  if (instance.noise != "rank_one" && instance.noise != "gaussian")
    throw ConfigError("instance.noise must be rank_one or gaussian");
  for (const auto* v : {&instance.delta, &instance.l1, &instance.l2})
    if (*v && !(**v > 0.0)) throw ConfigError("instance regularity values must be > 0");
  if (solver.algorithms.empty()) throw ConfigError("solver.algorithms must not be empty");
  for (const auto& a : solver.algorithms) algorithm_from_string(a);
  if (solver.gamma && !(*solver.gamma > 0.0)) throw ConfigError("solver.gamma must be > 0");
  if (solver.query_cap == 0) throw ConfigError("solver.query_cap must be > 0");
  if (!(solver.success_threshold >= 0.0)) throw ConfigError("solver.success_threshold must be >= 0");
  if (lowerbound.kind != "eps_chain" && lowerbound.kind != "gamma_chain")
    throw ConfigError("lowerbound.kind must be eps_chain or gamma_chain");
  if (lowerbound.T < 1) throw ConfigError("lowerbound.T must be >= 1");
  if (!(lowerbound.rho > 0.0 && lowerbound.rho <= 1.0)) throw ConfigError("lowerbound.rho must lie in (0, 1]");
  if (!(lowerbound.delta > 0.0 && lowerbound.delta < 1.0)) throw ConfigError("lowerbound.delta must lie in (0, 1)");
  if (suites.empty()) throw ConfigError("suites must not be empty");
  for (const auto& s : suites) {
    if (s == "all") continue;
    const auto& names = suite_names();
    if (std::find(names.begin(), names.end(), s) == names.end()) throw ConfigError("unknown suite: " + s);
  }
}

ProblemInstance build_instance(const InstanceSpec& s, double eps) {
  NoiseParams np;
  np.sigma1 = s.sigma1;
  np.sigma2 = s.sigma2;
  np.sigma2_as = s.sigma2_as;
  np.law = s.noise == "gaussian" ? NoiseLaw::gaussian : NoiseLaw::rank_one;
  np.query_points = s.mode == "n_point" ? s.points : 1;
  const int d = s.dim;

  auto chain_instance = [&](const ChainInstance& ci) {
    NoiseParams cn = np;
    if (ci.noiseless_gradient) cn.sigma1 = 0.0;
    ProblemInstance inst{ci.chain, ci.regularity, cn, {}};
    inst.factory = [ci](uint64_t seed) { return std::make_unique<ZeroChainOracle>(ci, seed); };
    return inst;
  };
  if (s.problem == "eps_chain")
    return chain_instance(build_eps_hard_instance(eps, s.l1.value_or(1.0), s.l2.value_or(1.0), s.sigma1, s.sigma2,
                                                  s.delta.value_or(100.0)));
  if (s.problem == "gamma_chain") {
    const double l2 = s.l2.value_or(1.0);
    const double gamma = opt(s, "gamma", std::sqrt(l2 * eps));
    return chain_instance(build_gamma_hard_instance(gamma, s.l1.value_or(1.0), l2, s.sigma2, s.delta.value_or(100.0)));
  }

  ProblemInstance inst;
  if (s.problem == "quadratic") {
    Mat A = linspace(d, opt(s, "eig_min", 1.0), opt(s, "eig_max", 3.0)).asDiagonal();
    inst = make_quadratic_instance(A, Vec::Constant(d, opt(s, "shift", 1.0)), np, s.l2.value_or(1.0));
  } else if (s.problem == "lambda_sum") {
    Vec c = Vec::Constant(d, opt(s, "center", 0.5));
    c[0] = opt(s, "first_center", c[0]);
    inst = make_lambda_sum_instance(c, np);
  } else if (s.problem == "saddle_chain") {
    inst = make_saddle_chain_instance(opt_int(s, "links", 2), d, np);
  } else if (s.problem == "scaled_ramp") {
    inst = make_ramp_instance(eps, d, np);
  } else if (s.problem == "logistic_erm") {
    auto f = std::make_shared<LogisticErm>(
        LogisticErm::random(opt_int(s, "samples", 200), d, opt(s, "ridge", 0.01), s.seed));
    // Per-component bounds: |a|^2/4 + ridge for the Hessian and
    // |a|^3 max|s''| = |a|^3/(6 sqrt 3) for its Lipschitz constant; F(0) = ln 2.
    const double a2 = f->features().rowwise().squaredNorm().maxCoeff();
    const double l1 = a2 / 4.0 + f->ridge();
    const double l2 = std::pow(a2, 1.5) / (6.0 * std::sqrt(3.0));
    inst.objective = f;
    inst.regularity = Regularity{std::log(2.0), l1, std::max(l2, 1e-12)};
    inst.noise = np;
    inst.factory = [f, reg = inst.regularity, np](uint64_t seed) {
      return std::make_unique<FiniteSumOracle>(f, reg, np, seed);
    };
  } else if (s.problem == "quadratic_finite_sum") {
    const Vec eig = linspace(d, opt(s, "eig_min", 1.0), opt(s, "eig_max", 3.0));
    const Vec b = Vec::Constant(d, opt(s, "shift", 1.0));
    const double spread = opt(s, "spread", 0.5);
    auto f = std::make_shared<QuadraticFiniteSum>(Mat(eig.asDiagonal()), b, spread, opt_int(s, "pairs", 4), s.seed);
    // Every component Hessian deviates from the mean by exactly `spread`.
    NoiseParams fn = np;
    fn.sigma2 = spread;
    fn.sigma2_as = spread;
    inst.objective = f;
    inst.regularity = Regularity{0.5 * b.cwiseQuotient(eig).dot(b), eig.maxCoeff(), s.l2.value_or(1.0)};
    inst.noise = fn;
    inst.factory = [f, reg = inst.regularity, fn](uint64_t seed) {
      return std::make_unique<FiniteSumOracle>(f, reg, fn, seed);
    };
  } else {
    throw ConfigError("unknown problem: " + s.problem);
  }
  if (s.delta) inst.regularity.delta = *s.delta;
  if (s.l1) inst.regularity.l1 = *s.l1;
  if (s.l2) inst.regularity.l2 = *s.l2;
  inst.regularity.validate();
  inst.noise.validate();
  return inst;
}

double resolve_gamma(const SolverSpec& s, const ProblemInstance& inst, double eps) {
  return s.gamma ? *s.gamma : std::sqrt(inst.regularity.l2 * eps);
}

SolverParams solver_params(const SolverSpec& s, const ProblemInstance& inst, double eps) {
  SolverParams sp;
  sp.epsilon = eps;
  sp.gamma = resolve_gamma(s, inst, eps);
  sp.overrides = s.overrides;
  sp.query_cap = s.query_cap;
  sp.success_threshold = s.success_threshold;
  sp.stop_at_first_passage = s.stop_at_first_passage;
  return sp;
}

void write_file(const std::string& dir, const std::string& name, const std::string& text) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw InputError("cannot create output directory " + dir + ": " + ec.message());
  const std::filesystem::path p = std::filesystem::path(dir) / name;
  std::ofstream out(p, std::ios::binary);
  if (!out) throw InputError("cannot write " + p.string());
  out << text;
}

}  // namespace sosp
