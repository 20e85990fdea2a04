#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "sosp/chain.hpp"
#include "sosp/components.hpp"
#include "sosp/cubic.hpp"
#include "sosp/errors.hpp"
#include "sosp/harness.hpp"
#include "sosp/solvers.hpp"
#include "sosp/zero_chain.hpp"

namespace py = pybind11;
using namespace sosp;

namespace {

// Seeded oracle over an instance built from a config's "instance" block.
class PyOracle {
 public:
  PyOracle(const std::string& config_json, double eps, uint64_t seed)
      : inst_(build_instance(parse_config(config_json).instance, eps)), oracle_(inst_.make_oracle(seed)) {}
  int dim() const { return inst_.dim(); }
  Vec grad(const Vec& x) { return oracle_->query_grad(x); }
  Vec hvp(const Vec& x, const Vec& v) { return oracle_->query_hvp(x, v); }
  Mat hess(const Vec& x) { return oracle_->query_hess(x); }
  Vec exact_grad(const Vec& x) const { return inst_.objective->gradient(x); }
  double value(const Vec& x) const { return inst_.objective->value(x); }
  py::dict ledger() const {
    const QueryLedger& l = oracle_->ledger();
    py::dict d;
    d["grad"] = l.grad;
    d["hvp"] = l.hvp;
    d["hess"] = l.hess;
    d["value"] = l.value;
    d["total"] = l.total();
    return d;
  }
  py::dict regularity() const {
    py::dict d;
    d["delta"] = inst_.regularity.delta;
    d["l1"] = inst_.regularity.l1;
    d["l2"] = inst_.regularity.l2;
    return d;
  }

 private:
  ProblemInstance inst_;
  std::unique_ptr<StochasticOracle> oracle_;
};

}  // namespace

PYBIND11_MODULE(_sosp, m) {
  m.doc() = "Stochastic second-order optimization: oracles, solvers, hard instances and experiment harness";

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<InputError>(m, "InputError", PyExc_ValueError);
  py::register_exception<ContractError>(m, "ContractError", PyExc_RuntimeError);
  py::register_exception<BudgetError>(m, "BudgetError", PyExc_RuntimeError);

  m.def("version", &version_string);
  m.def("derive_seed", [](uint64_t master, const std::string& label, const std::vector<uint64_t>& i) {
    switch (i.size()) {
      case 0: return derive_seed(master, label);
      case 1: return derive_seed(master, label, {i[0]});
      case 2: return derive_seed(master, label, {i[0], i[1]});
      case 3: return derive_seed(master, label, {i[0], i[1], i[2]});
      default: throw ConfigError("derive_seed: at most 3 indices");
    }
  }, py::arg("master"), py::arg("label"), py::arg("indices") = std::vector<uint64_t>{});

  m.def("psi", &psi, py::arg("x"), py::arg("order") = 0);
  m.def("phi", &phi, py::arg("x"), py::arg("order") = 0);
  m.def("lambda_fn", &lambda_fn, py::arg("x"), py::arg("order") = 0);
  m.def("prog", &prog, py::arg("x"), py::arg("threshold"));
  m.def("progress_deadline", &progress_deadline, py::arg("T"), py::arg("rho"), py::arg("delta"));

  m.def("solve_cubic", [](const Vec& g, const Mat& H, double M, double radius) {
    const CubicSolution s = solve_cubic_tr(CubicModel{g, H, M, radius});
    py::dict d;
    d["s"] = s.s;
    d["multiplier"] = s.multiplier;
    d["residual"] = s.residual;
    d["hard_case"] = s.hard_case;
    d["on_boundary"] = s.on_boundary;
    d["converged"] = s.converged;
    d["model_value"] = s.model_value;
    return d;
  }, py::arg("g"), py::arg("H"), py::arg("M"), py::arg("radius"));

  m.def("sgd_hvp_rvr_params", [](double delta, double l1, double l2, double sigma1, double sigma2, double eps) {
    NoiseParams n;
    n.sigma1 = sigma1;
    n.sigma2 = sigma2;
    SolverParams sp;
    sp.epsilon = eps;
    const SgdHvpRvrParams p = sgd_hvp_rvr_params(Regularity{delta, l1, l2}, n, sp);
    py::dict d;
    d["eta"] = p.eta;
    d["b"] = p.b;
    d["T"] = p.T;
    return d;
  }, py::arg("delta"), py::arg("l1"), py::arg("l2"), py::arg("sigma1"), py::arg("sigma2"), py::arg("eps"));

  m.def("fit_slope", [](const std::vector<std::pair<double, double>>& pts) {
    const SlopeFit f = fit_slope(pts);
    return py::make_tuple(f.slope, f.intercept, f.r_squared);
  });

  // Harness entry points take and return JSON/CSV text; the package wrapper decodes it.
  m.def("normalize_config", [](const std::string& text) { return to_json_string(parse_config(text)); });
  m.def("run_solve", [](const std::string& text) {
    const SolveReport r = [&] {
      py::gil_scoped_release release;
      return run_solve(parse_config(text));
    }();
    return py::make_tuple(r.manifest_json, r.trajectory_csv);
  });
  m.def("run_sweep", [](const std::string& text) {
    const SweepReport r = [&] {
      py::gil_scoped_release release;
      return run_sweep(parse_config(text));
    }();
    return py::make_tuple(sweep_csv(r.rows), sweep_summary_json(r));
  });
  m.def("run_lowerbound", [](const std::string& text) {
    const LowerBoundReport r = [&] {
      py::gil_scoped_release release;
      return run_lowerbound(parse_config(text));
    }();
    return py::make_tuple(r.csv(), r.trajectory_csv(), r.summary_json());
  });
  m.def("run_verify", [](const std::vector<std::string>& suites) {
    py::gil_scoped_release release;
    return run_verify(suites).json();
  });

  py::class_<PyOracle>(m, "Oracle")
      .def(py::init<const std::string&, double, uint64_t>(), py::arg("config_json"), py::arg("eps"),
           py::arg("seed"))
      .def_property_readonly("dim", &PyOracle::dim)
      .def("grad", &PyOracle::grad)
      .def("hvp", &PyOracle::hvp)
      .def("hess", &PyOracle::hess)
      .def("exact_grad", &PyOracle::exact_grad)
      .def("value", &PyOracle::value)
      .def("ledger", &PyOracle::ledger)
      .def("regularity", &PyOracle::regularity);
}
