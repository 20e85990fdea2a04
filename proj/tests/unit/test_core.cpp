#include <cmath>

#include "check.hpp"
#include "sosp/errors.hpp"
#include "sosp/linalg.hpp"
#include "sosp/mss.hpp"
#include "sosp/numeric.hpp"
#include "sosp/oracle.hpp"
#include "sosp/problems.hpp"

using namespace sosp;

namespace {

ProblemInstance half_norm_sq(int d, double s1, double s2, int points = 1) {
  NoiseParams n;
  n.sigma1 = s1;
  n.sigma2 = s2;
  n.query_points = points;
  return make_quadratic_instance(Mat::Identity(d, d), Vec::Zero(d), n);
}

}  // namespace

TEST_SUITE("core") {
  TEST_CASE("seed derivation is stable and label sensitive") {
    CHECK(derive_seed(42, "oracle") == derive_seed(42, "oracle"));
    CHECK(derive_seed(42, "oracle") != derive_seed(42, "algorithm"));
    CHECK(derive_seed(42, "sweep", {0, 1}) != derive_seed(42, "sweep", {1, 0}));
    CounterRng a(7), b(7);
    for (int k = 0; k < 100; ++k) CHECK(a.next_u64() == b.next_u64());
    CHECK(CounterRng(7).substream(3).key() == CounterRng(7).substream(3).key());
  }

  TEST_CASE("ceiling tolerance and log dimension") {
    CHECK(ceil_tol(1100.0 * 0.01) == 11.0);
    CHECK(ceil_tol(11.5) == 12.0);
    CHECK(ceil_tol(3.0) == 3.0);
    CHECK(log_dim(1) == 1.0);
    CHECK(log_dim(2) == 1.0);
    CHECK(log_dim(20) == doctest::Approx(std::log(20.0)));
  }

  TEST_CASE("noiseless gradient is exact") {
    auto inst = make_lambda_sum_instance(Vec::Constant(4, 0.5), NoiseParams{});
    auto o = inst.make_oracle(1);
    const Vec x = Vec::LinSpaced(4, -1.0, 1.0);
    CHECK((o->query_grad(x) - inst.objective->gradient(x)).norm() == 0.0);
    CHECK(o->ledger().grad == 1);
  }

  TEST_CASE("unit gradient noise at the minimizer of half the squared norm") {
    auto inst = half_norm_sq(5, 1.0, 0.0);
    auto o = inst.make_oracle(3);
    for (int k = 0; k < 50; ++k) CHECK(o->query_grad(Vec::Zero(5)).norm() == doctest::Approx(1.0).epsilon(1e-12));
  }

  TEST_CASE("gradient and Hessian-vector estimators") {
    CHECK_PROPERTY(props::gradient_unbiased(0.5, 10000));
    CHECK_PROPERTY(props::gradient_noise_norm(0.5, 10000));
    CHECK_PROPERTY(props::hvp_unbiased(1.0, 10000));
    CHECK_PROPERTY(props::hvp_noise_norm(1.0, 10000));
    CHECK_PROPERTY(props::hvp_zero_direction());
    CHECK_PROPERTY(props::exact_channels_when_noiseless());
  }

  TEST_CASE("zero direction returns zero and is still counted") {
    auto inst = half_norm_sq(3, 0.0, 1.0);
    auto o = inst.make_oracle(5);
    CHECK(o->query_hvp(Vec::Ones(3), Vec::Zero(3)).norm() == 0.0);
    CHECK(o->ledger().hvp == 1);
  }

  TEST_CASE("Hessian answers are symmetric and concentrate") {
    auto inst = half_norm_sq(6, 0.0, 1.0);
    auto o = inst.make_oracle(9);
    for (int k = 0; k < 20; ++k) {
      const Mat H = o->query_hess(Vec::Ones(6));
      CHECK((H - H.transpose()).norm() == 0.0);
    }
    CHECK_PROPERTY(props::hessian_noise_exact(1.0, 500));
    const PropertyResult r = props::matrix_concentration(10, 100, 1.0, 200);
    CHECK(r.bound == doctest::Approx(22.0 * std::log(10.0) / 100.0));
    CHECK(r.bound == doctest::Approx(0.5066).epsilon(1e-3));
    CHECK_PROPERTY(r);
  }

  TEST_CASE("ledger counts one per call and rejects malformed input") {
    auto inst = half_norm_sq(3, 1.0, 1.0);
    auto o = inst.make_oracle(11);
    o->query_grad(Vec::Zero(3));
    o->query_hvp(Vec::Zero(3), Vec::Ones(3));
    o->query_hess(Vec::Zero(3));
    o->query_value(Vec::Zero(3));
    CHECK(o->ledger() == QueryLedger{1, 1, 1, 1});
    CHECK(o->substreams_consumed() == 4);
    CHECK_THROWS_AS(o->query_grad(Vec::Zero(2)), InputError);
    Vec bad = Vec::Zero(3);
    bad[1] = std::nan("");
    CHECK_THROWS_AS(o->query_grad(bad), InputError);
    CHECK_PROPERTY(props::ledger_conservation());
  }

  TEST_CASE("analytic derivatives agree with finite differences") {
    CHECK_PROPERTY(props::finite_difference_consistency(50));
  }

  TEST_CASE("finite-difference Hessian-vector adapter") {
    CHECK_PROPERTY(props::finite_diff_hvp_exact_on_quadratic());
    // F = x^3/6 in one dimension: (F'(0.2) - F'(0)) / 0.2 = 0.1.
    ProblemInstance inst{std::make_shared<CubicCoordinate>(1, 1.0, 0.0), Regularity{1.0, 1.0, 1.0}, {}, {}};
    inst.noise.query_points = 2;
    auto o = inst.make_oracle(1);
    CHECK(finite_diff_hvp(*o, Vec::Zero(1), Vec::Ones(1), 0.2)[0] == doctest::Approx(0.1).epsilon(1e-12));
    CHECK_PROPERTY(props::finite_diff_hvp_cubic_bias());
    CHECK_PROPERTY(props::finite_diff_hvp_variance(0.3, 10000));
  }

  TEST_CASE("mean-squared smoothness diagnostics") {
    CHECK_PROPERTY(props::mss_finite_sum(0.5));
    CHECK_PROPERTY(props::mss_zero_noise());
    CHECK_PROPERTY(props::mss_counterexample());
  }

  TEST_CASE("tridiagonal and dense eigensolvers agree") {
    CounterRng r(4);
    Vec d(8), e(7);
    for (int i = 0; i < 8; ++i) d[i] = r.normal();
    for (int i = 0; i < 7; ++i) e[i] = r.normal();
    Mat H = Mat::Zero(8, 8);
    H.diagonal() = d;
    for (int i = 0; i < 7; ++i) H(i, i + 1) = H(i + 1, i) = e[i];
    const SymEig a = sym_eig(H), b = tridiag_eig(d, e);
    CHECK((a.values - b.values).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(lambda_min(H, true) == doctest::Approx(lambda_min(H, false)).epsilon(1e-12));
    CHECK(is_symmetric(H));
  }
}
