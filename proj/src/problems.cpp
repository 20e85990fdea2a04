#include "sosp/problems.hpp"

#include <cmath>
#include <numbers>

#include "sosp/components.hpp"
#include "sosp/errors.hpp"
#include "sosp/linalg.hpp"

namespace sosp {

// ---------------------------------------------------------------- Quadratic

Quadratic::Quadratic(Mat A, Vec b) : A_(std::move(A)), b_(std::move(b)) {
  if (A_.rows() != A_.cols() || A_.rows() != b_.size()) throw ConfigError("quadratic: shape mismatch");
  if (!is_symmetric(A_)) throw ConfigError("quadratic: A must be symmetric");
}
double Quadratic::value(const Vec& x) const { return 0.5 * x.dot(A_ * x) - b_.dot(x); }
Vec Quadratic::gradient(const Vec& x) const { return A_ * x - b_; }
Mat Quadratic::hessian(const Vec&) const { return A_; }
Vec Quadratic::hvp(const Vec&, const Vec& v) const { return A_ * v; }

// ---------------------------------------------------------------- LambdaSum

LambdaSum::LambdaSum(Vec center) : c_(std::move(center)) {
  if (c_.size() < 1) throw ConfigError("lambda_sum: empty center");
}
double LambdaSum::value(const Vec& x) const {
  double s = 0.0;
  for (int i = 0; i < dim(); ++i) s += lambda_fn(x[i] - c_[i], 0);
  return s;
}
Vec LambdaSum::gradient(const Vec& x) const {
  Vec g(dim());
  for (int i = 0; i < dim(); ++i) g[i] = lambda_fn(x[i] - c_[i], 1);
  return g;
}
Mat LambdaSum::hessian(const Vec& x) const {
  Mat H = Mat::Zero(dim(), dim());
  for (int i = 0; i < dim(); ++i) H(i, i) = lambda_fn(x[i] - c_[i], 2);
  return H;
}
Vec LambdaSum::hvp(const Vec& x, const Vec& v) const {
  Vec out(dim());
  for (int i = 0; i < dim(); ++i) out[i] = lambda_fn(x[i] - c_[i], 2) * v[i];
  return out;
}

// ---------------------------------------------------------------- CubicCoordinate

CubicCoordinate::CubicCoordinate(int dim, double kappa, double quad)
    : d_(dim), kappa_(kappa), quad_(quad) {
  if (dim < 1) throw ConfigError("cubic_coordinate: dim must be >= 1");
}
double CubicCoordinate::value(const Vec& x) const {
  return kappa_ / 6.0 * x[0] * x[0] * x[0] + 0.5 * quad_ * x.squaredNorm();
}
Vec CubicCoordinate::gradient(const Vec& x) const {
  Vec g = quad_ * x;
  g[0] += 0.5 * kappa_ * x[0] * x[0];
  return g;
}
Mat CubicCoordinate::hessian(const Vec& x) const {
  Mat H = quad_ * Mat::Identity(d_, d_);
  H(0, 0) += kappa_ * x[0];
  return H;
}

// ---------------------------------------------------------------- SaddleChain

SaddleChain::SaddleChain(int links, int dim, double gate_width, double confinement)
    : k_(links), d_(dim), w_(gate_width), mu_(confinement) {
  if (links < 1 || dim < links) throw ConfigError("saddle_chain: need 1 <= links <= dim");
  if (!(gate_width > 0.0) || !(confinement >= 0.0)) throw ConfigError("saddle_chain: bad shape parameters");
}

double SaddleChain::gate(double t, int order) const {
  const double w2 = w_ * w_;
  const double e = std::exp(-0.5 * t * t / w2);
  switch (order) {
    case 0: return 1.0 - e;
    case 1: return t / w2 * e;
    default: return (1.0 / w2 - t * t / (w2 * w2)) * e;
  }
}

double SaddleChain::value(const Vec& x) const {
  double s = lambda_fn(x[0], 0);
  for (int i = 1; i < k_; ++i) s += gate(x[i - 1], 0) * lambda_fn(x[i], 0);
  for (int i = k_; i < d_; ++i) s += 0.5 * mu_ * x[i] * x[i];
  return s;
}

Vec SaddleChain::gradient(const Vec& x) const {
  Vec g = Vec::Zero(d_);
  for (int j = 0; j < k_; ++j) {
    const double gj = j == 0 ? 1.0 : gate(x[j - 1], 0);
    g[j] = gj * lambda_fn(x[j], 1);
    if (j + 1 < k_) g[j] += gate(x[j], 1) * lambda_fn(x[j + 1], 0);
  }
  for (int i = k_; i < d_; ++i) g[i] = mu_ * x[i];
  return g;
}

Mat SaddleChain::hessian(const Vec& x) const {
  Mat H = Mat::Zero(d_, d_);
  for (int j = 0; j < k_; ++j) {
    const double gj = j == 0 ? 1.0 : gate(x[j - 1], 0);
    H(j, j) = gj * lambda_fn(x[j], 2);
    if (j + 1 < k_) {
      H(j, j) += gate(x[j], 2) * lambda_fn(x[j + 1], 0);
      const double off = gate(x[j], 1) * lambda_fn(x[j + 1], 1);
      H(j, j + 1) = off;
      H(j + 1, j) = off;
    }
  }
  for (int i = k_; i < d_; ++i) H(i, i) = mu_;
  return H;
}

// ---------------------------------------------------------------- ScaledRamp

namespace {
// Antiderivative of erfc.
double erfc_integral(double z) { return z * std::erfc(z) - std::exp(-z * z) / std::sqrt(std::numbers::pi); }
}  // namespace

ScaledRamp::ScaledRamp(double eps, int dim, double drop, double slope_factor, double sharpness,
                       double confinement)
    : d_(dim), eps_(eps), drop_(drop), m_(slope_factor), k_(sharpness), mu_(confinement) {
  if (!(eps > 0.0) || !(drop > 0.0) || !(slope_factor > 1.0) || !(sharpness > 0.0) || dim < 1)
    throw ConfigError("scaled_ramp: invalid parameters");
  D_ = drop_ / (m_ * eps_);
}

double ScaledRamp::value(const Vec& x) const {
  const double u = x[0] / D_;
  const double P = (erfc_integral(k_ * (u - 1.0)) - erfc_integral(-k_)) / (2.0 * k_);
  double v = -m_ * eps_ * D_ * P;
  for (int i = 1; i < d_; ++i) v += 0.5 * mu_ * x[i] * x[i];
  return v;
}

Vec ScaledRamp::gradient(const Vec& x) const {
  Vec g = mu_ * x;
  g[0] = -0.5 * m_ * eps_ * std::erfc(k_ * (x[0] / D_ - 1.0));
  return g;
}

Mat ScaledRamp::hessian(const Vec& x) const {
  Mat H = mu_ * Mat::Identity(d_, d_);
  const double z = k_ * (x[0] / D_ - 1.0);
  H(0, 0) = m_ * eps_ * k_ / (D_ * std::sqrt(std::numbers::pi)) * std::exp(-z * z);
  return H;
}

Vec ScaledRamp::hvp(const Vec& x, const Vec& v) const {
  Vec out = mu_ * v;
  const double z = k_ * (x[0] / D_ - 1.0);
  out[0] = m_ * eps_ * k_ / (D_ * std::sqrt(std::numbers::pi)) * std::exp(-z * z) * v[0];
  return out;
}

double ScaledRamp::gap() const { return -m_ * eps_ * D_ * erfc_integral(-k_) / (2.0 * k_); }

// ---------------------------------------------------------------- finite sums

double FiniteSumObjective::value(const Vec& x) const {
  double s = 0.0;
  for (int i = 0; i < components(); ++i) s += component_value(i, x);
  return s / components();
}
Vec FiniteSumObjective::gradient(const Vec& x) const {
  Vec g = Vec::Zero(dim());
  for (int i = 0; i < components(); ++i) g += component_gradient(i, x);
  return g / components();
}
Mat FiniteSumObjective::hessian(const Vec& x) const {
  Mat H = Mat::Zero(dim(), dim());
  for (int i = 0; i < components(); ++i) H += component_hessian(i, x);
  return H / components();
}
Vec FiniteSumObjective::hvp(const Vec& x, const Vec& v) const {
  Vec out = Vec::Zero(dim());
  for (int i = 0; i < components(); ++i) out += component_hvp(i, x, v);
  return out / components();
}

LogisticErm::LogisticErm(Mat features, Vec labels, double ridge)
    : A_(std::move(features)), y_(std::move(labels)), ridge_(ridge) {
  if (A_.rows() != y_.size() || A_.rows() < 1) throw ConfigError("logistic_erm: shape mismatch");
}

LogisticErm LogisticErm::random(int n, int d, double ridge, uint64_t seed) {
  CounterRng rng(seed);
  Mat A(n, d);
  Vec y(n);
  for (int i = 0; i < n; ++i) {
    A.row(i) = rng.unit_vector(d).transpose();
    y[i] = rng.rademacher();
  }
  return LogisticErm(std::move(A), std::move(y), ridge);
}

namespace {
double sigmoid(double t) { return t >= 0 ? 1.0 / (1.0 + std::exp(-t)) : std::exp(t) / (1.0 + std::exp(t)); }
double log1pexp(double t) { return t > 0 ? t + std::log1p(std::exp(-t)) : std::log1p(std::exp(t)); }
}  // namespace

double LogisticErm::component_value(int i, const Vec& x) const {
  return log1pexp(-y_[i] * A_.row(i).dot(x)) + 0.5 * ridge_ * x.squaredNorm();
}
Vec LogisticErm::component_gradient(int i, const Vec& x) const {
  const double m = y_[i] * A_.row(i).dot(x);
  return (-y_[i] * sigmoid(-m)) * A_.row(i).transpose() + ridge_ * x;
}
Mat LogisticErm::component_hessian(int i, const Vec& x) const {
  const double s = sigmoid(y_[i] * A_.row(i).dot(x));
  Mat H = (s * (1.0 - s)) * (A_.row(i).transpose() * A_.row(i));
  H.diagonal().array() += ridge_;
  return H;
}
Vec LogisticErm::component_hvp(int i, const Vec& x, const Vec& v) const {
  const double s = sigmoid(y_[i] * A_.row(i).dot(x));
  return (s * (1.0 - s) * A_.row(i).dot(v)) * A_.row(i).transpose() + ridge_ * v;
}

QuadraticFiniteSum::QuadraticFiniteSum(Mat A, Vec b, double spread, int pairs, uint64_t seed)
    : A_(std::move(A)), b_(std::move(b)), s_(spread) {
  if (A_.rows() != b_.size() || pairs < 1) throw ConfigError("quadratic_finite_sum: bad shape");
  CounterRng rng(seed);
  for (int p = 0; p < pairs; ++p) dirs_.push_back(rng.unit_vector(int(b_.size())));
}
double QuadraticFiniteSum::component_value(int i, const Vec& x) const {
  const Vec& u = dirs_[i / 2];
  const double sgn = (i % 2 == 0) ? 1.0 : -1.0;
  const double ux = u.dot(x);
  return 0.5 * x.dot(A_ * x) + 0.5 * sgn * s_ * ux * ux - b_.dot(x);
}
Vec QuadraticFiniteSum::component_gradient(int i, const Vec& x) const {
  const Vec& u = dirs_[i / 2];
  const double sgn = (i % 2 == 0) ? 1.0 : -1.0;
  return A_ * x + (sgn * s_ * u.dot(x)) * u - b_;
}
Mat QuadraticFiniteSum::component_hessian(int i, const Vec&) const {
  const Vec& u = dirs_[i / 2];
  const double sgn = (i % 2 == 0) ? 1.0 : -1.0;
  return A_ + (sgn * s_) * (u * u.transpose());
}
Vec QuadraticFiniteSum::component_hvp(int i, const Vec&, const Vec& v) const {
  const Vec& u = dirs_[i / 2];
  const double sgn = (i % 2 == 0) ? 1.0 : -1.0;
  return A_ * v + (sgn * s_ * u.dot(v)) * u;
}

FiniteSumOracle::FiniteSumOracle(std::shared_ptr<const FiniteSumObjective> f, Regularity reg,
                                 NoiseParams noise, uint64_t seed)
    : StochasticOracle(f, reg, noise, seed), fs_(f.get()) {}

Vec FiniteSumOracle::grad_sample(const Vec& x, CounterRng& z) const {
  return fs_->component_gradient(int(z.below(fs_->components())), x);
}
Vec FiniteSumOracle::hvp_sample(const Vec& x, const Vec& v, CounterRng& z) const {
  return fs_->component_hvp(int(z.below(fs_->components())), x, v);
}
Mat FiniteSumOracle::hess_sample(const Vec& x, CounterRng& z) const {
  return fs_->component_hessian(int(z.below(fs_->components())), x);
}
double FiniteSumOracle::value_sample(const Vec& x, CounterRng& z) const {
  return fs_->component_value(int(z.below(fs_->components())), x);
}

DirectionalNoiseOracle::DirectionalNoiseOracle(std::shared_ptr<const Objective> f, Regularity reg,
                                               int query_points, uint64_t seed, double scale)
    : StochasticOracle(f, reg,
                       NoiseParams{.sigma1 = scale, .sigma2 = 0.0, .sigma2_as = 0.0,
                                   .query_points = query_points},
                       seed),
      scale_(scale) {}

Vec DirectionalNoiseOracle::grad_sample(const Vec& x, CounterRng& z) const {
  Vec g = objective().gradient(x);
  const double n = x.norm();
  const double s = z.rademacher();
  if (n > 0.0) g += (scale_ * s / n) * x;
  return g;
}
Vec DirectionalNoiseOracle::hvp_sample(const Vec& x, const Vec& v, CounterRng&) const {
  return objective().hvp(x, v);
}
Mat DirectionalNoiseOracle::hess_sample(const Vec& x, CounterRng&) const {
  return objective().hessian(x);
}

// ---------------------------------------------------------------- measurement

namespace {
double op_norm(const Mat& H) {
  Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (H + H.transpose()), Eigen::EigenvaluesOnly);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}
}  // namespace

RegularityEstimate estimate_regularity(const Objective& f, const Vec& lo, const Vec& hi,
                                       int samples, uint64_t seed, double margin) {
  CounterRng rng(seed);
  const int d = f.dim();
  const double h = 1e-4;
  RegularityEstimate est;
  auto third = [&](const Vec& x, const Vec& u) {
    return op_norm(f.hessian(x + h * u) - f.hessian(x - h * u)) / (2.0 * h);
  };
  Vec best_x = lo, best_u = Vec::Unit(d, 0);
  for (int s = 0; s < samples; ++s) {
    Vec x(d);
    for (int i = 0; i < d; ++i) x[i] = lo[i] + (hi[i] - lo[i]) * rng.uniform();
    est.l1 = std::max(est.l1, op_norm(f.hessian(x)));
    const Vec u = rng.unit_vector(d);
    const double t = third(x, u);
    if (t > est.l2) {
      est.l2 = t;
      best_x = x;
      best_u = u;
    }
  }
  // Local refinement around the best third-derivative probe.
  double step = 0.1 * (hi - lo).maxCoeff() / std::sqrt(double(samples) + 1.0);
  for (int round = 0; round < 200; ++round) {
    const Vec x = best_x + step * rng.normal_vector(d);
    const Vec u = (best_u + 0.1 * rng.normal_vector(d)).normalized();
    const double t = third(x, u);
    est.l1 = std::max(est.l1, op_norm(f.hessian(x)));
    if (t > est.l2) {
      est.l2 = t;
      best_x = x;
      best_u = u;
    } else if (round % 20 == 19) {
      step *= 0.5;
    }
  }
  est.l1 *= margin;
  est.l2 *= margin;
  return est;
}

// ---------------------------------------------------------------- instances

ProblemInstance make_quadratic_instance(Mat A, Vec b, NoiseParams noise, double l2) {
  auto q = std::make_shared<Quadratic>(A, b);
  Eigen::SelfAdjointEigenSolver<Mat> es(A);
  const double l1 = std::max(es.eigenvalues().cwiseAbs().maxCoeff(), 1e-12);
  double delta = 0.0;
  if (es.eigenvalues().minCoeff() > 0.0) delta = 0.5 * b.dot(A.ldlt().solve(b));
  else delta = Regularity::kUnbounded;
  if (!std::isfinite(delta)) throw ConfigError("quadratic instance: A must be positive definite");
  return {q, Regularity{delta, l1, l2}, noise, {}};
}

ProblemInstance make_lambda_sum_instance(Vec center, NoiseParams noise) {
  auto f = std::make_shared<LambdaSum>(center);
  double delta = 0.0;
  for (int i = 0; i < center.size(); ++i) delta += lambda_fn(-center[i], 0) + 8.0;
  return {f, Regularity{delta, LambdaSum::kL1, LambdaSum::kL2}, noise, {}};
}

ProblemInstance make_saddle_chain_instance(int links, int dim, NoiseParams noise) {
  auto f = std::make_shared<SaddleChain>(links, dim);
  Vec lo = Vec::Constant(dim, -7.0), hi = Vec::Constant(dim, 7.0);
  const RegularityEstimate r = estimate_regularity(*f, lo, hi, 4000 * links, 0x5ADD1E, 1.05);
  return {f, Regularity{f->gap(), r.l1, r.l2}, noise, {}};
}

ProblemInstance make_ramp_instance(double eps, int dim, NoiseParams noise) {
  auto f = std::make_shared<ScaledRamp>(eps, dim);
  return {f, Regularity{f->gap(), 1.0, 1.0}, noise, {}};
}

}  // namespace sosp
