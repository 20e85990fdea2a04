#include "check.hpp"
#include "sosp/errors.hpp"
#include "sosp/problems.hpp"
#include "sosp/rvr.hpp"

using namespace sosp;

TEST_SUITE("hvp_rvr") {
  TEST_CASE("batch sizes and path length") {
    const RvrConfig cfg{0.1, 0.5, 1.0, 1.0, 1.0};
    CHECK(cfg.path_steps(0.1) == 11);
    CHECK(cfg.fresh_batch() == 500);
    CHECK(cfg.path_steps(0.0) == 0);
    const RvrConfig exact{0.1, 1.0, 0.0, 0.0, 1.0};
    CHECK(exact.fresh_batch() == 1);
    CHECK_PROPERTY(props::rvr_arithmetic());
  }

  TEST_CASE("expected query budget") {
    CHECK(expected_query_budget(RvrConfig{0.1, 1.0, 0.1, 0.0, 1.0}, 0.0) == doctest::Approx(12.0));
    CHECK(expected_query_budget(RvrConfig{0.1, 0.5, 1.0, 1.0, 1.0}, 0.1) == doctest::Approx(319.2));
  }

  TEST_CASE("invalid configurations are rejected") {
    CHECK_THROWS_AS(RvrConfig({0.0, 0.5, 1.0, 1.0, 1.0}).validate(), ConfigError);
    CHECK_THROWS_AS(RvrConfig({0.1, 0.0, 1.0, 1.0, 1.0}).validate(), ConfigError);
    CHECK_THROWS_AS(RvrConfig({0.1, 1.5, 1.0, 1.0, 1.0}).validate(), ConfigError);
  }

  TEST_CASE("first call starts fresh, repeated point keeps the estimate") {
    NoiseParams n;
    n.sigma1 = 1.0;
    n.sigma2 = 1.0;
    auto inst = make_lambda_sum_instance(Vec::Constant(3, 0.5), n);
    auto o = inst.make_oracle(2);
    const RvrConfig cfg{0.1, 0.5, 1.0, 1.0, LambdaSum::kL2};
    EstimatorState st;
    CounterRng coins(5);
    RvrCallInfo info;
    const Vec x = Vec::Constant(3, 0.1);
    rvr_estimate(st, x, cfg, *o, coins, &info);
    CHECK(info.fresh);
    CHECK(info.queries == cfg.fresh_batch());
    CHECK_PROPERTY(props::rvr_empty_path());
    CHECK_PROPERTY(props::rvr_exact_on_quadratic());
  }

  TEST_CASE("estimator moments") {
    CHECK_PROPERTY(props::rvr_fresh_variance(1000));
    CHECK_PROPERTY(props::rvr_path_bias());
    CHECK_PROPERTY(props::rvr_path_variance(2000));
    CHECK_PROPERTY(props::rvr_query_determinism());
  }

  TEST_CASE("query budget and error along a trajectory") {
    CHECK_PROPERTY(props::rvr_query_budget(1000));
    CHECK_PROPERTY(props::rvr_error_along_trajectory(300, 5));
    CHECK_PROPERTY(props::rvr_fresh_only_error(100, 10));
  }
}
