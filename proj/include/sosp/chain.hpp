#pragma once

#include <memory>
#include <string>
#include <vector>

#include "sosp/oracle.hpp"

namespace sosp {

enum class ChainKind {
  eps_chain,    // -Psi(1)Phi(x_1) + sum [Psi(-x_{i-1})Phi(-x_i) - Psi(x_{i-1})Phi(x_i)]
  gamma_chain,  //  Psi(1)Lambda(x_1) + sum [Psi(-x_{i-1})Lambda(-x_i) + Psi(x_{i-1})Lambda(x_i)]
};

std::string to_string(ChainKind k);

// max{i >= 0 : |x_i| > threshold} with x_0 = 1 (1-based indices).
int prog(const Vec& x, double threshold);

// alpha * chain(beta * x) in dimension T.  Hessians are tridiagonal.
class ChainFunction final : public Objective {
 public:
  ChainFunction(ChainKind kind, int T, double alpha = 1.0, double beta = 1.0);
  int dim() const override { return T_; }
  std::string name() const override { return to_string(kind_); }
  double value(const Vec& x) const override;
  Vec gradient(const Vec& x) const override;
  Mat hessian(const Vec& x) const override;
  Vec hvp(const Vec& x, const Vec& v) const override;
  bool tridiagonal() const override { return true; }

  // Unscaled chain at y (no alpha, beta).
  double raw_value(const Vec& y) const;
  Vec raw_gradient(const Vec& y) const;
  Mat raw_hessian(const Vec& y) const;

  ChainKind kind() const { return kind_; }
  int length() const { return T_; }
  double alpha() const { return alpha_; }
  double beta() const { return beta_; }
  // Unscaled per-coordinate gap constant: 12 for eps_chain, 40 for gamma_chain.
  double gap_per_link() const { return kind_ == ChainKind::eps_chain ? 12.0 : 40.0; }

 private:
  // d^m/dp^m d^n/dq^n of the link term a Psi(-p) Xi(-q) + c Psi(p) Xi(q).
  double link(double p, double q, int m, int n) const;
  ChainKind kind_;
  int T_;
  double alpha_, beta_;
};

// Sup bounds of the unscaled chain: l0 >= |grad_i|, l1 >= Hessian row
// absolute sums (hence operator norm and row norms), l2 >= Hessian
// Lipschitz constant.  Measured on a grid plus refinement, times a margin.
struct ChainConstants {
  double l0 = 0.0, l1 = 0.0, l2 = 0.0;
};
ChainConstants measure_chain_constants(ChainKind kind, double margin = 1.05);
// Measured once per process.
const ChainConstants& chain_constants(ChainKind kind);

struct ScalingRecipe {
  ChainKind kind = ChainKind::eps_chain;
  double target = 0.0;  // epsilon or gamma
  double alpha = 0.0, beta = 0.0, rho = 1.0;
  int T = 0;
  ChainConstants constants;
  std::string binding;  // which constraint fixed beta
  // Scaled quantities for the constraint checks.
  double gap_bound = 0.0;       // alpha * gap_per_link * T
  double l1_bound = 0.0;        // alpha beta^2 l1
  double l2_bound = 0.0;        // alpha beta^3 l2
  double sigma_bound = 0.0;     // estimator std bound of the randomized channel
};

// Instance plus its zero-chain oracle parameters.
struct ChainInstance {
  std::shared_ptr<const ChainFunction> chain;
  ScalingRecipe recipe;
  double rho = 1.0;
  bool noiseless_gradient = false;
  double threshold = 0.25;  // progress threshold that decides the revealed coordinate
  Regularity regularity;
};

// Unscaled chain (alpha = beta = 1) with an explicit reveal probability.
ChainInstance make_unscaled_chain_instance(ChainKind kind, int T, double rho);

// Epsilon recipe: alpha = 2 eps/beta, beta = min{l0 s2/(l1 s1), L1/(2 eps l1),
// sqrt(L2/(2 eps l2))}, rho = min{(2 eps l0/s1)^2, 1}, T = floor(delta beta/(24 eps)).
ChainInstance build_eps_hard_instance(double eps, double l1_target, double l2_target, double sigma1, double sigma2,
                                      double delta);

// Gamma recipe: beta = L2/(5 gamma l2), alpha = 5 gamma/beta^2,
// rho = min{(5 l1 gamma/s2)^2, 1}, T = floor(delta beta^2/(200 gamma)).
// Requires gamma <= L1/(5 l1).
ChainInstance build_gamma_hard_instance(double gamma, double l1_target, double l2_target, double sigma2,
                                        double delta);

struct AuditResult {
  std::string name;
  int probes = 0;
  int failures = 0;
  double worst_margin = 0.0;  // smallest slack observed (negative = violated)
  bool passed() const { return failures == 0; }
};

// |grad_{prog_1(x)+1} F(x)| > 1 whenever prog_1(x) < T (unscaled eps chain).
AuditResult audit_large_gradient(int T, int probes, uint64_t seed);
// lambda_min(Hess G(x)) <= -0.5 whenever prog_{9/10}(x) < T - 1, and <= 700 always.
AuditResult audit_gamma_eigenvalue(int T, int probes, uint64_t seed);
// Exact zeros outside the three central bands.
AuditResult audit_tridiagonal(ChainKind kind, int T, int probes, uint64_t seed);
// Sampled ranges of Psi, Lambda and their derivatives against 0<=Psi<=e,
// 0<=Psi'<=sqrt(54/e), |Psi''|<=40, -8<=Lambda<=0, |Lambda'|<=6, -8<=Lambda''<=4.
AuditResult audit_component_bounds(int probes, uint64_t seed);
// Scaled-instance audits from the recipe: large gradient (eps) or negative
// curvature (gamma) on structured probes, plus Hessian-Lipschitz quotients.
AuditResult audit_scaled_instance(const ChainInstance& inst, int probes, uint64_t seed);

}  // namespace sosp
