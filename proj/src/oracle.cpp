#include "sosp/oracle.hpp"

#include <cmath>

#include "sosp/errors.hpp"
#include "sosp/linalg.hpp"

namespace sosp {

void Regularity::validate() const {
  if (!(delta >= 0.0) || !std::isfinite(delta)) throw ConfigError("regularity: delta must be finite and >= 0");
  if (!(l1 > 0.0)) throw ConfigError("regularity: l1 must be > 0 (or unbounded)");
  if (!(l2 > 0.0) || !std::isfinite(l2)) throw ConfigError("regularity: l2 must be finite and > 0");
}

void NoiseParams::validate() const {
  if (!(sigma1 >= 0.0) || !std::isfinite(sigma1)) throw ConfigError("noise: sigma1 must be >= 0");
  if (!(sigma2 >= 0.0) || !std::isfinite(sigma2)) throw ConfigError("noise: sigma2 must be >= 0");
  if (!(sigma0 >= 0.0)) throw ConfigError("noise: sigma0 must be >= 0");
  if (sigma2_as && !(*sigma2_as >= 0.0)) throw ConfigError("noise: sigma2_as must be >= 0");
  if (query_points < 1) throw ConfigError("noise: query_points must be >= 1");
}

QueryLedger& QueryLedger::operator+=(const QueryLedger& o) {
  grad += o.grad;
  hvp += o.hvp;
  hess += o.hess;
  value += o.value;
  return *this;
}

QueryLedger operator-(QueryLedger a, const QueryLedger& b) {
  a.grad -= b.grad;
  a.hvp -= b.hvp;
  a.hess -= b.hess;
  a.value -= b.value;
  return a;
}

double lambda_min_exact(const Objective& f, const Vec& x) {
  return lambda_min(f.hessian(x), f.tridiagonal());
}

StochasticOracle::StochasticOracle(std::shared_ptr<const Objective> f, Regularity reg,
                                   NoiseParams noise, uint64_t seed)
    : f_(std::move(f)), reg_(reg), noise_(noise), base_(seed) {
  if (!f_) throw ConfigError("oracle: null objective");
  reg_.validate();
  noise_.validate();
  if (noise_.law == NoiseLaw::rank_one && noise_.sigma2_as && *noise_.sigma2_as < noise_.sigma2)
    throw ConfigError("noise: rank-one Hessian noise has norm sigma2, so sigma2_as must be >= sigma2");
}

std::optional<double> StochasticOracle::hessian_noise_bound() const {
  if (noise_.sigma2_as) return noise_.sigma2_as;
  if (noise_.law == NoiseLaw::rank_one || noise_.sigma2 == 0.0) return noise_.sigma2;
  return std::nullopt;
}

void StochasticOracle::check_point(const Vec& x) const {
  if (x.size() != f_->dim()) throw InputError("oracle: point has wrong dimension");
  if (!x.allFinite()) throw InputError("oracle: point has non-finite entries");
}

CounterRng StochasticOracle::next_stream() {
  if (calls_ >= cap_) throw BudgetError("oracle: query cap reached", double(calls_) + 1, double(cap_));
  return base_.substream(calls_++);
}

Vec StochasticOracle::query_grad(const Vec& x) {
  check_point(x);
  CounterRng z = next_stream();
  ++ledger_.grad;
  return grad_sample(x, z);
}

Vec StochasticOracle::query_hvp(const Vec& x, const Vec& v) {
  check_point(x);
  if (v.size() != x.size()) throw InputError("oracle: direction has wrong dimension");
  if (!v.allFinite()) throw InputError("oracle: direction has non-finite entries");
  CounterRng z = next_stream();
  ++ledger_.hvp;
  return hvp_sample(x, v, z);
}

Mat StochasticOracle::query_hess(const Vec& x) {
  check_point(x);
  CounterRng z = next_stream();
  ++ledger_.hess;
  return hess_sample(x, z);
}

double StochasticOracle::query_value(const Vec& x) {
  check_point(x);
  CounterRng z = next_stream();
  ++ledger_.value;
  return value_sample(x, z);
}

OracleAnswer StochasticOracle::query(const Vec& x, bool with_hessian) {
  check_point(x);
  CounterRng z = next_stream();
  OracleAnswer a;
  // One draw feeds every field; the sub-generators are forked so each field
  // sees the same z regardless of which fields are requested.
  CounterRng zv = z.substream(0), zg = z.substream(1), zh = z.substream(2);
  a.value = value_sample(x, zv);
  a.grad = grad_sample(x, zg);
  if (with_hessian) {
    a.hess = hess_sample(x, zh);
    ++ledger_.hess;
  } else {
    ++ledger_.grad;
  }
  return a;
}

std::vector<Vec> StochasticOracle::query_grad_multi(const std::vector<Vec>& points) {
  if (!noise_.n_point()) throw ContractError("oracle: multi-point queries need the n-point model");
  if (points.empty() || static_cast<int>(points.size()) > noise_.query_points)
    throw InputError("oracle: number of points outside 1..n");
  for (const Vec& p : points) check_point(p);
  const CounterRng z = next_stream();
  ++ledger_.grad;
  std::vector<Vec> out;
  out.reserve(points.size());
  for (const Vec& p : points) {
    CounterRng zc = z;
    out.push_back(grad_sample(p, zc));
  }
  return out;
}

Vec StochasticOracle::grad_sample(const Vec& x, CounterRng& z) const {
  Vec g = f_->gradient(x);
  if (noise_.sigma1 == 0.0) return g;
  const int d = dim();
  if (noise_.law == NoiseLaw::rank_one) {
    const double xi = z.rademacher();
    g += (noise_.sigma1 * xi) * z.unit_vector(d);
  } else {
    g += (noise_.sigma1 / std::sqrt(double(d))) * z.normal_vector(d);
  }
  return g;
}

Vec StochasticOracle::hvp_sample(const Vec& x, const Vec& v, CounterRng& z) const {
  Vec hv = f_->hvp(x, v);
  if (noise_.sigma2 == 0.0) return hv;
  const double s = noise_.law == NoiseLaw::rank_one ? double(z.rademacher()) : z.normal();
  const Vec u = z.unit_vector(dim());
  hv += (noise_.sigma2 * s * u.dot(v)) * u;
  return hv;
}

Mat StochasticOracle::hess_sample(const Vec& x, CounterRng& z) const {
  Mat h = f_->hessian(x);
  if (noise_.sigma2 == 0.0) return h;
  const double s = noise_.law == NoiseLaw::rank_one ? double(z.rademacher()) : z.normal();
  const Vec u = z.unit_vector(dim());
  h.noalias() += (noise_.sigma2 * s) * (u * u.transpose());
  return h;
}

double StochasticOracle::value_sample(const Vec& x, CounterRng& z) const {
  const double v = f_->value(x);
  if (noise_.sigma0 == 0.0) return v;
  return v + noise_.sigma0 * z.rademacher();
}

std::unique_ptr<StochasticOracle> ProblemInstance::make_oracle(uint64_t seed) const {
  if (factory) return factory(seed);
  return std::make_unique<StochasticOracle>(objective, regularity, noise, seed);
}

}  // namespace sosp
