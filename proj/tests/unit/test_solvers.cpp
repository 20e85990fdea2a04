#include <cmath>

#include "check.hpp"
#include "sosp/errors.hpp"
#include "sosp/problems.hpp"
#include "sosp/solvers.hpp"

using namespace sosp;

namespace {

NoiseParams unit_noise() {
  NoiseParams n;
  n.sigma1 = 1.0;
  n.sigma2 = 1.0;
  return n;
}

}  // namespace

TEST_SUITE("solvers") {
  TEST_CASE("algorithm names round-trip") {
    for (Algorithm a : {Algorithm::sgd, Algorithm::sgd_hvp_rvr, Algorithm::cubic_rvr, Algorithm::sosp_hvp,
                        Algorithm::sosp_cubic})
      CHECK(algorithm_from_string(to_string(a)) == a);
    CHECK_THROWS_AS(algorithm_from_string("newton"), ConfigError);
  }

  TEST_CASE("recursive-estimator SGD parameters") {
    SolverParams sp;
    sp.epsilon = 0.01;
    const SgdHvpRvrParams p = sgd_hvp_rvr_params(Regularity{1.0, 1.0, 1.0}, unit_noise(), sp);
    CHECK(p.eta == doctest::Approx(1.0 / (2.0 * std::sqrt(2.01))).epsilon(1e-12));
    CHECK(p.eta == doctest::Approx(0.35267).epsilon(1e-4));
    CHECK(p.T == 56710);
  }

  TEST_CASE("cubic-step parameters") {
    SolverParams sp;
    sp.epsilon = 0.1;
    const CubicRvrParams p = cubic_rvr_params(Regularity{1.0, 1.0, 1.0}, unit_noise(), 10, sp);
    CHECK(p.M == doctest::Approx(5.0));
    CHECK(p.eta == doctest::Approx(25.0 * std::sqrt(0.02)).epsilon(1e-12));
    CHECK(p.n_H == 63322);
  }

  TEST_CASE("mixing probabilities of the second-order methods") {
    CHECK_PROPERTY(props::parameter_examples());
    CHECK_PROPERTY(props::parameter_fidelity(100));
  }

  TEST_CASE("overrides replace derived parameters") {
    SolverParams sp;
    sp.epsilon = 0.1;
    sp.overrides.eta = 0.05;
    sp.overrides.T = 17;
    const SgdHvpRvrParams p = sgd_hvp_rvr_params(Regularity{1.0, 1.0, 1.0}, unit_noise(), sp);
    CHECK(p.eta == 0.05);
    CHECK(p.T == 17);
    CHECK(sp.overrides.any());
  }

  TEST_CASE("budget cap refuses oversized runs") {
    auto inst = make_lambda_sum_instance(Vec::Constant(3, 0.5), unit_noise());
    SolverParams sp;
    sp.epsilon = 0.01;
    sp.query_cap = 1000;
    CHECK_THROWS_AS(sgd_hvp_rvr(inst, sp, 1), BudgetError);
    try {
      sgd_hvp_rvr(inst, sp, 1);
    } catch (const BudgetError& e) {
      CHECK(e.required > 1000.0);
      CHECK(e.cap == 1000.0);
    }
  }

  TEST_CASE("runs are deterministic given the seed") {
    auto inst = make_lambda_sum_instance(Vec::Constant(3, 0.5), unit_noise());
    SolverParams sp;
    sp.epsilon = 0.2;
    sp.overrides.T = 200;
    for (Algorithm a : {Algorithm::sgd, Algorithm::sgd_hvp_rvr, Algorithm::cubic_rvr}) {
      const RunResult x = run_algorithm(a, inst, sp, 9), y = run_algorithm(a, inst, sp, 9);
      CHECK(x.output == y.output);
      CHECK(x.ledger == y.ledger);
      CHECK(x.output_index == y.output_index);
    }
    sp.gamma = 0.5;
    for (Algorithm a : {Algorithm::sosp_hvp, Algorithm::sosp_cubic}) {
      const RunResult x = run_algorithm(a, inst, sp, 9), y = run_algorithm(a, inst, sp, 9);
      CHECK(x.output == y.output);
      CHECK(x.ledger == y.ledger);
    }
  }

  TEST_CASE("second-order methods need a curvature tolerance") {
    auto inst = make_lambda_sum_instance(Vec::Constant(3, 0.5), unit_noise());
    SolverParams sp;
    CHECK_THROWS_AS(sosp_hvp(inst, sp, 1), ConfigError);
  }

  TEST_CASE("degenerate horizons and noiseless problems") {
    CHECK_PROPERTY(props::horizon_zero());
    CHECK_PROPERTY(props::sgd_hvp_rvr_noiseless_quadratic());
    CHECK_PROPERTY(props::cubic_rvr_noiseless_descent());
    CHECK_PROPERTY(props::sosp_cubic_noiseless_quadratic());
    CHECK_PROPERTY(props::sosp_hvp_convex_no_certificates());
  }

  TEST_CASE("ledger, descent and output selection") {
    CHECK_PROPERTY(props::sgd_hvp_rvr_telescoped_descent());
    CHECK_PROPERTY(props::sgd_hvp_rvr_ledger_budget(2));
    CHECK_PROPERTY(props::output_uniformity(500));
  }
}
