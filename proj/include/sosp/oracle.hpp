#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "sosp/rng.hpp"

namespace sosp {

struct Regularity {
  static constexpr double kUnbounded = std::numeric_limits<double>::infinity();
  double delta = 1.0;  // F(x0) - inf F
  double l1 = 1.0;     // gradient Lipschitz constant, may be kUnbounded
  double l2 = 1.0;     // Hessian Lipschitz constant
  void validate() const;
};

enum class NoiseLaw { rank_one, gaussian };

struct NoiseParams {
  double sigma1 = 0.0;
  double sigma2 = 0.0;
  std::optional<double> sigma2_as;  // almost-sure operator-norm bound on Hessian noise
  double sigma0 = 0.0;              // value-noise scale; no algorithm reads values
  NoiseLaw law = NoiseLaw::rank_one;
  int query_points = 1;  // 1 = single-point model, n >= 2 = n-point model
  bool n_point() const { return query_points >= 2; }
  void validate() const;
};

struct QueryLedger {
  uint64_t grad = 0;
  uint64_t hvp = 0;
  uint64_t hess = 0;
  uint64_t value = 0;
  uint64_t total() const { return grad + hvp + hess + value; }
  QueryLedger& operator+=(const QueryLedger& o);
  friend QueryLedger operator-(QueryLedger a, const QueryLedger& b);
  friend bool operator==(const QueryLedger&, const QueryLedger&) = default;
};

struct OracleAnswer {
  double value = 0.0;
  Vec grad;
  std::optional<Mat> hess;
};

// Exact objective with derivatives to order two.
class Objective {
 public:
  virtual ~Objective() = default;
  virtual int dim() const = 0;
  virtual std::string name() const = 0;
  virtual double value(const Vec& x) const = 0;
  virtual Vec gradient(const Vec& x) const = 0;
  virtual Mat hessian(const Vec& x) const = 0;
  virtual Vec hvp(const Vec& x, const Vec& v) const { return hessian(x) * v; }
  // True when the Hessian is tridiagonal everywhere (enables the banded eigensolver).
  virtual bool tridiagonal() const { return false; }
};

double lambda_min_exact(const Objective& f, const Vec& x);

// Stochastic oracle over an exact objective.  Every channel call consumes one
// substream of the oracle's generator and adds exactly one to one ledger
// counter.  The base class realizes the additive noise law; subclasses replace
// the *_sample hooks for structured estimators.
class StochasticOracle {
 public:
  StochasticOracle(std::shared_ptr<const Objective> f, Regularity reg, NoiseParams noise,
                   uint64_t seed);
  virtual ~StochasticOracle() = default;

  Vec query_grad(const Vec& x);
  Vec query_hvp(const Vec& x, const Vec& v);
  Mat query_hess(const Vec& x);
  double query_value(const Vec& x);
  OracleAnswer query(const Vec& x, bool with_hessian);
  // n-point model: gradients at several points under one shared draw.
  std::vector<Vec> query_grad_multi(const std::vector<Vec>& points);

  int dim() const { return f_->dim(); }
  const Objective& objective() const { return *f_; }
  std::shared_ptr<const Objective> objective_ptr() const { return f_; }
  const Regularity& regularity() const { return reg_; }
  const NoiseParams& noise() const { return noise_; }
  const QueryLedger& ledger() const { return ledger_; }
  uint64_t substreams_consumed() const { return calls_; }
  void set_query_cap(uint64_t cap) { cap_ = cap; }

  // Almost-sure bound on the Hessian noise operator norm, if one holds.
  virtual std::optional<double> hessian_noise_bound() const;
  // True when the Hessian estimator is the Jacobian of the gradient estimator
  // for the same draw.  Additive gradient noise does not depend on x, so the
  // base oracle qualifies only when its Hessian is exact.
  virtual bool jacobian_consistent() const { return noise_.sigma2 == 0.0; }

 protected:
  virtual Vec grad_sample(const Vec& x, CounterRng& z) const;
  virtual Vec hvp_sample(const Vec& x, const Vec& v, CounterRng& z) const;
  virtual Mat hess_sample(const Vec& x, CounterRng& z) const;
  virtual double value_sample(const Vec& x, CounterRng& z) const;

  void check_point(const Vec& x) const;

 private:
  CounterRng next_stream();

  std::shared_ptr<const Objective> f_;
  Regularity reg_;
  NoiseParams noise_;
  CounterRng base_;
  uint64_t calls_ = 0;
  uint64_t cap_ = std::numeric_limits<uint64_t>::max();
  QueryLedger ledger_;
};

using OracleFactory = std::function<std::unique_ptr<StochasticOracle>(uint64_t seed)>;

// Objective + regularity + noise model; builds seeded oracles.
struct ProblemInstance {
  std::shared_ptr<const Objective> objective;
  Regularity regularity;
  NoiseParams noise;
  OracleFactory factory;  // empty = additive noise oracle
  int dim() const { return objective->dim(); }
  std::unique_ptr<StochasticOracle> make_oracle(uint64_t seed) const;
};

}  // namespace sosp
