#include <cmath>

#include "check.hpp"
#include "sosp/cubic.hpp"
#include "sosp/curvature.hpp"
#include "sosp/errors.hpp"

using namespace sosp;

TEST_SUITE("subproblems") {
  TEST_CASE("cubic model: interior solution from the scalar secular equation") {
    const CubicModel m{Vec::Unit(2, 0), Mat::Identity(2, 2), 2.0, 10.0};
    const CubicSolution s = solve_cubic_tr(m);
    const double theta = (std::sqrt(5.0) - 1.0) / 2.0;
    CHECK(s.s[0] == doctest::Approx(-theta).epsilon(1e-10));
    CHECK(std::abs(s.s[1]) < 1e-14);
    CHECK(s.converged);
    CHECK_FALSE(s.on_boundary);
  }

  TEST_CASE("cubic model: isotropic boundary solution") {
    const CubicModel m{Vec::Unit(2, 0), Mat::Identity(2, 2), 2.0, 0.1};
    const CubicSolution s = solve_cubic_tr(m);
    CHECK(s.s[0] == doctest::Approx(-0.1).epsilon(1e-10));
    CHECK(s.on_boundary);
    CHECK(s.multiplier > 0.0);
  }

  TEST_CASE("cubic model: hard case with zero gradient") {
    Mat H = Mat::Zero(2, 2);
    H(0, 0) = -1.0;
    H(1, 1) = 1.0;
    const CubicSolution s = solve_cubic_tr(CubicModel{Vec::Zero(2), H, 2.0, 10.0});
    CHECK(s.hard_case);
    CHECK(s.s[0] == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(std::abs(s.s[1]) < 1e-12);
    CHECK(s.model_value == doctest::Approx(-1.0 / 6.0).epsilon(1e-10));
  }

  TEST_CASE("cubic model: random KKT, brute force and secular monotonicity") {
    CHECK_PROPERTY(props::cubic_examples());
    CHECK_PROPERTY(props::cubic_kkt_random(200));
    CHECK_PROPERTY(props::cubic_brute_force(5, 20000));
    CHECK_PROPERTY(props::secular_monotone(50));
  }

  TEST_CASE("descent inequalities") {
    CHECK_PROPERTY(props::gradient_descent_lemma(200));
    CHECK_PROPERTY(props::cubic_descent_lemma(200));
    CHECK_PROPERTY(props::curvature_step_descent(100));
  }

  TEST_CASE("exact curvature direction") {
    Mat H = Mat::Zero(2, 2);
    H(0, 0) = -1.0;
    H(1, 1) = 2.0;
    const auto u = exact_curvature_direction(H, 0.2);
    REQUIRE(u.has_value());
    CHECK(std::abs((*u)[0]) == doctest::Approx(1.0));
    CHECK(std::abs((*u)[1]) < 1e-12);
    CHECK_FALSE(exact_curvature_direction(Mat::Identity(3, 3), 0.5).has_value());
    // lambda_min = -4 gamma exactly is inside the certified region.
    Mat B = Mat::Identity(2, 2);
    B(0, 0) = -0.4;
    CHECK(exact_curvature_direction(B, 0.1).has_value());
    CHECK_PROPERTY(props::exact_curvature_examples());
  }

  TEST_CASE("curvature step moves by gamma / L2 along the direction") {
    CounterRng r(1);
    Vec y;
    do {
      y = curvature_step(Vec::Zero(3), Vec::Unit(3, 0), 1.0, 2.0, r);
    } while (y[0] < 0.0);
    CHECK(y[0] == doctest::Approx(0.5));
    CHECK(y.tail(2).norm() == 0.0);
  }

  TEST_CASE("Oja budget and search contract") {
    const OjaBudget b = oja_budget(10, 0.1, 0.05, 1.0, 0.2);
    // (0.2 + 1)^2 / (4 * 0.2^2) * ln^2(200) and 9 * 0.2^2 * ln(40) / 0.1^2.
    CHECK(b.iterations == 253);
    CHECK(b.verification_samples == 133);
    CHECK(b.step_size == doctest::Approx(1.0 / 1.2));
    CHECK_PROPERTY(props::oja_psd(20));
    CHECK_PROPERTY(props::oja_negative(20));
    CHECK_PROPERTY(props::oja_noiseless(5));
  }
}
