#include <cmath>

#include "check.hpp"
#include "sosp/chain.hpp"
#include "sosp/components.hpp"
#include "sosp/zero_chain.hpp"

using namespace sosp;

TEST_SUITE("hard_instances") {
  TEST_CASE("bump and ramp components") {
    CHECK(psi(0.5) == 0.0);
    CHECK(psi(1.0) == doctest::Approx(1.0));
    CHECK(psi(0.75) == doctest::Approx(std::exp(-3.0)).epsilon(1e-12));
    CHECK(phi(0.0, 1) == doctest::Approx(std::sqrt(std::exp(1.0))).epsilon(1e-12));
    CHECK(phi(0.0) == doctest::Approx(2.066366).epsilon(1e-6));
    CHECK(phi(0.0, 2) == 0.0);
    CHECK(lambda_fn(0.0) == 0.0);
    CHECK(lambda_fn(0.0, 2) == doctest::Approx(-8.0));
    CHECK(lambda_fn(40.0) == doctest::Approx(-8.0));
    CHECK_PROPERTY(props::component_examples());
  }

  TEST_CASE("chains at the origin") {
    const ChainFunction f(ChainKind::eps_chain, 5);
    CHECK(f.value(Vec::Zero(5)) == doctest::Approx(-2.066366).epsilon(1e-6));
    const Vec g = f.gradient(Vec::Zero(5));
    CHECK(g[0] == doctest::Approx(-std::sqrt(std::exp(1.0))).epsilon(1e-12));
    CHECK(g.tail(4).norm() == 0.0);
    const ChainFunction h(ChainKind::gamma_chain, 5);
    CHECK(h.value(Vec::Zero(5)) == 0.0);
    CHECK(h.hessian(Vec::Zero(5))(0, 0) == doctest::Approx(-8.0));
    CHECK_PROPERTY(props::chain_examples());
  }

  TEST_CASE("progress index") {
    Vec a(4);
    a << 0.3, 0.6, 0.0, 0.0;
    CHECK(prog(a, 0.5) == 2);
    CHECK(prog(Vec::Zero(4), 0.9) == 0);
    Vec b(4);
    b << 1.0, 0.0, 2.0, 0.0;
    CHECK(prog(b, 0.0) == 3);
    CHECK_PROPERTY(props::prog_examples());
  }

  TEST_CASE("structural audits") {
    CHECK_PROPERTY(props::large_gradient_audit(200));
    CHECK_PROPERTY(props::gamma_eigenvalue_audit(200));
    CHECK_PROPERTY(props::tridiagonal_audit(200));
    CHECK_PROPERTY(props::component_bounds_audit(20000));
    CHECK_PROPERTY(props::scaled_eps_audit(200));
    CHECK_PROPERTY(props::scaled_gamma_audit(200));
    CHECK_PROPERTY(props::chain_finite_differences(50));
  }

  TEST_CASE("scaled instance with deterministic revelation") {
    // sigma1 at the threshold 2 eps l0 makes the reveal probability one.
    const double eps = 0.01;
    const ChainInstance inst = build_eps_hard_instance(eps, 1.0, 1.0, 2.0 * eps * chain_constants(ChainKind::eps_chain).l0,
                                                       1e6, 100.0);
    CHECK(inst.rho == doctest::Approx(1.0));
  }

  TEST_CASE("zero-chain oracle") {
    CHECK_PROPERTY(props::zero_chain_support(500));
    CHECK_PROPERTY(props::zero_chain_reveal_rate(5000));
    CHECK_PROPERTY(props::zero_chain_moments(5000));
    CHECK_PROPERTY(props::gamma_gradient_noiseless(2000));
  }

  TEST_CASE("zero-respecting progress") {
    const ChainInstance inst = make_unscaled_chain_instance(ChainKind::eps_chain, 10, 1.0);
    ZeroChainOracle o(inst, 3);
    const ProgressTrace t = zero_respecting_run(o, 1000);
    REQUIRE(t.full_progress_at.has_value());
    CHECK(*t.full_progress_at == 10);
    CHECK(progress_deadline(20, 0.01, 0.1) == doctest::Approx((20.0 - std::log(10.0)) / 0.02));
    CHECK(progress_deadline(20, 0.01, 0.1) == doctest::Approx(884.87).epsilon(1e-4));
    CHECK_PROPERTY(props::zero_respecting_deterministic());
    CHECK_PROPERTY(props::discovery_time_geometric(200));
    CHECK_PROPERTY(props::progress_deadline_failures(20, 0.01, 0.1, 200));
    CHECK_PROPERTY(props::progress_median(20, 0.01, 200));
  }
}
