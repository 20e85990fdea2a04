#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "sosp/oracle.hpp"

namespace sosp {

// 1/2 x'Ax - b'x.
class Quadratic final : public Objective {
 public:
  Quadratic(Mat A, Vec b);
  int dim() const override { return int(b_.size()); }
  std::string name() const override { return "quadratic"; }
  double value(const Vec& x) const override;
  Vec gradient(const Vec& x) const override;
  Mat hessian(const Vec& x) const override;
  Vec hvp(const Vec& x, const Vec& v) const override;
  const Mat& A() const { return A_; }
  const Vec& b() const { return b_; }

 private:
  Mat A_;
  Vec b_;
};

// sum_i Lambda(x_i - c_i).  Local maximum at c, infimum -8d approached at infinity.
class LambdaSum final : public Objective {
 public:
  explicit LambdaSum(Vec center);
  int dim() const override { return int(c_.size()); }
  std::string name() const override { return "lambda_sum"; }
  double value(const Vec& x) const override;
  Vec gradient(const Vec& x) const override;
  Mat hessian(const Vec& x) const override;
  Vec hvp(const Vec& x, const Vec& v) const override;
  bool tridiagonal() const override { return true; }
  const Vec& center() const { return c_; }
  static constexpr double kL1 = 8.0;
  static constexpr double kL2 = 11.041;  // max |Lambda'''|, attained at x^2 = 3 - sqrt(6)

 private:
  Vec c_;
};

// (kappa/6) x_1^3 + (q/2)|x|^2.  Hessian is kappa-Lipschitz; unbounded below.
class CubicCoordinate final : public Objective {
 public:
  CubicCoordinate(int dim, double kappa, double quad);
  int dim() const override { return d_; }
  std::string name() const override { return "cubic_coordinate"; }
  double value(const Vec& x) const override;
  Vec gradient(const Vec& x) const override;
  Mat hessian(const Vec& x) const override;
  bool tridiagonal() const override { return true; }

 private:
  int d_;
  double kappa_, quad_;
};

// sum_{i<=links} gate(x_{i-1}) Lambda(x_i) + (mu/2) sum_{i>links} x_i^2 with
// gate(t) = 1 - exp(-t^2/(2w^2)) and the first gate fixed to 1.  The origin is
// a strict saddle; clearing link i exposes a fresh saddle along x_{i+1}.
class SaddleChain final : public Objective {
 public:
  SaddleChain(int links, int dim, double gate_width = 2.0, double confinement = 1.0);
  int dim() const override { return d_; }
  std::string name() const override { return "saddle_chain"; }
  double value(const Vec& x) const override;
  Vec gradient(const Vec& x) const override;
  Mat hessian(const Vec& x) const override;
  bool tridiagonal() const override { return true; }
  int links() const { return k_; }
  double gap() const { return 8.0 * k_; }  // F(0) - inf F

 private:
  double gate(double t, int order) const;
  int k_, d_;
  double w_, mu_;
};

// Epsilon-scaled ramp along x_1 plus a quadratic in the remaining coordinates:
//   F(x) = -m eps D P(x_1/D) + (mu/2) sum_{i>=2} x_i^2,  D = drop/(m eps),
// with P' = erfc(k(u-1))/2.  The slope is m*eps over a drop of about `drop`,
// then vanishes; first passage to |grad| <= eps happens near x_1 = D.
class ScaledRamp final : public Objective {
 public:
  ScaledRamp(double eps, int dim, double drop = 1.0, double slope_factor = 2.0,
             double sharpness = 4.0, double confinement = 1.0);
  int dim() const override { return d_; }
  std::string name() const override { return "scaled_ramp"; }
  double value(const Vec& x) const override;
  Vec gradient(const Vec& x) const override;
  Mat hessian(const Vec& x) const override;
  Vec hvp(const Vec& x, const Vec& v) const override;
  bool tridiagonal() const override { return true; }
  double gap() const;  // F(0) - inf F
  double length() const { return D_; }

 private:
  int d_;
  double eps_, drop_, m_, k_, mu_, D_;
};

// Finite sum (1/n) sum_i f_i with per-component derivatives.
class FiniteSumObjective : public Objective {
 public:
  virtual int components() const = 0;
  virtual double component_value(int i, const Vec& x) const = 0;
  virtual Vec component_gradient(int i, const Vec& x) const = 0;
  virtual Mat component_hessian(int i, const Vec& x) const = 0;
  virtual Vec component_hvp(int i, const Vec& x, const Vec& v) const {
    return component_hessian(i, x) * v;
  }
  double value(const Vec& x) const override;
  Vec gradient(const Vec& x) const override;
  Mat hessian(const Vec& x) const override;
  Vec hvp(const Vec& x, const Vec& v) const override;
};

// f_i(x) = log(1 + exp(-y_i a_i'x)) + (ridge/2)|x|^2.
class LogisticErm final : public FiniteSumObjective {
 public:
  LogisticErm(Mat features, Vec labels, double ridge);
  static LogisticErm random(int n, int d, double ridge, uint64_t seed);
  int dim() const override { return int(A_.cols()); }
  std::string name() const override { return "logistic_erm"; }
  int components() const override { return int(A_.rows()); }
  double component_value(int i, const Vec& x) const override;
  Vec component_gradient(int i, const Vec& x) const override;
  Mat component_hessian(int i, const Vec& x) const override;
  Vec component_hvp(int i, const Vec& x, const Vec& v) const override;
  const Mat& features() const { return A_; }
  double ridge() const { return ridge_; }

 private:
  Mat A_;
  Vec y_;
  double ridge_;
};

// Components 1/2 x'(A + s xi u u')x - b'x with xi = +-1 in balanced pairs, so
// the mean Hessian is exactly A and every component deviates by exactly s in
// operator norm.
class QuadraticFiniteSum final : public FiniteSumObjective {
 public:
  QuadraticFiniteSum(Mat A, Vec b, double spread, int pairs, uint64_t seed);
  int dim() const override { return int(b_.size()); }
  std::string name() const override { return "quadratic_finite_sum"; }
  int components() const override { return int(dirs_.size()) * 2; }
  double component_value(int i, const Vec& x) const override;
  Vec component_gradient(int i, const Vec& x) const override;
  Mat component_hessian(int i, const Vec& x) const override;
  Vec component_hvp(int i, const Vec& x, const Vec& v) const override;
  double spread() const { return s_; }

 private:
  Mat A_;
  Vec b_;
  double s_;
  std::vector<Vec> dirs_;
};

// Draws a uniformly random component per call; the Hessian estimator is the
// Jacobian of the gradient estimator for the same draw.
class FiniteSumOracle final : public StochasticOracle {
 public:
  FiniteSumOracle(std::shared_ptr<const FiniteSumObjective> f, Regularity reg, NoiseParams noise,
                  uint64_t seed);
  bool jacobian_consistent() const override { return true; }
  std::optional<double> hessian_noise_bound() const override { return noise().sigma2_as; }

 protected:
  Vec grad_sample(const Vec& x, CounterRng& z) const override;
  Vec hvp_sample(const Vec& x, const Vec& v, CounterRng& z) const override;
  Mat hess_sample(const Vec& x, CounterRng& z) const override;
  double value_sample(const Vec& x, CounterRng& z) const override;

 private:
  const FiniteSumObjective* fs_;
};

// Gradient noise z * scale * x/|x| with z uniform on {-1, 1}; exact Hessian.
// A gradient estimator that is not mean-squared smooth although the Hessian
// estimator has zero variance.
class DirectionalNoiseOracle final : public StochasticOracle {
 public:
  DirectionalNoiseOracle(std::shared_ptr<const Objective> f, Regularity reg, int query_points,
                         uint64_t seed, double scale = 1.0);
  bool jacobian_consistent() const override { return false; }

 protected:
  Vec grad_sample(const Vec& x, CounterRng& z) const override;
  Vec hvp_sample(const Vec& x, const Vec& v, CounterRng& z) const override;
  Mat hess_sample(const Vec& x, CounterRng& z) const override;

 private:
  double scale_;
};

// Sampled estimate of sup |Hessian|_op and of the Hessian Lipschitz constant
// over a box, with a multiplicative safety margin.
struct RegularityEstimate {
  double l1 = 0.0;
  double l2 = 0.0;
};
RegularityEstimate estimate_regularity(const Objective& f, const Vec& lo, const Vec& hi,
                                       int samples, uint64_t seed, double margin = 1.05);

// Ready-made instances.
ProblemInstance make_quadratic_instance(Mat A, Vec b, NoiseParams noise, double l2 = 1.0);
ProblemInstance make_lambda_sum_instance(Vec center, NoiseParams noise);
ProblemInstance make_saddle_chain_instance(int links, int dim, NoiseParams noise);
ProblemInstance make_ramp_instance(double eps, int dim, NoiseParams noise);

}  // namespace sosp
