#include "sosp/zero_chain.hpp"

#include <cmath>

#include "sosp/errors.hpp"

namespace sosp {

namespace {
NoiseParams chain_noise(const ChainInstance& inst) {
  NoiseParams n;
  const double spread = std::sqrt((1.0 - inst.rho) / inst.rho);
  const ChainConstants& k = inst.recipe.constants;
  const double a = inst.chain->alpha(), b = inst.chain->beta();
  n.sigma1 = inst.noiseless_gradient ? 0.0 : a * b * k.l0 * spread;
  n.sigma2 = a * b * b * k.l1 * spread;
  return n;
}
}  // namespace

ZeroChainOracle::ZeroChainOracle(const ChainInstance& inst, uint64_t seed)
    : StochasticOracle(inst.chain, inst.regularity, chain_noise(inst), seed),
      chain_(inst.chain),
      rho_(inst.rho),
      threshold_(inst.threshold),
      noiseless_(inst.noiseless_gradient) {
  if (!(rho_ > 0.0 && rho_ <= 1.0)) throw ConfigError("zero chain: rho must be in (0, 1]");
  const ChainConstants& k = inst.recipe.constants;
  const double a = chain_->alpha(), b = chain_->beta();
  // A revealed row and column of magnitude l1 scaled by (1/rho - 1).
  hess_bound_ = 2.0 * a * b * b * k.l1 * (1.0 / rho_ - 1.0);
}

std::optional<double> ZeroChainOracle::hessian_noise_bound() const { return hess_bound_; }

Vec ZeroChainOracle::grad_sample(const Vec& x, CounterRng& z) const {
  Vec g = chain_->gradient(x);
  if (noiseless_) return g;
  const double f = z.bernoulli(rho_) ? 1.0 / rho_ : 0.0;
  const int p = progress(x);
  for (int i = p; i < g.size(); ++i) g[i] *= f;
  return g;
}

Mat ZeroChainOracle::masked_hessian(const Vec& x, CounterRng& z) const {
  Mat H = chain_->hessian(x);
  const double f = z.bernoulli(rho_) ? 1.0 / rho_ : 0.0;
  const int p = progress(x);
  const int T = int(H.rows());
  for (int i = 0; i < T; ++i)
    for (int j = 0; j < T; ++j)
      if (std::max(i, j) >= p) H(i, j) *= f;
  return H;
}

Mat ZeroChainOracle::hess_sample(const Vec& x, CounterRng& z) const { return masked_hessian(x, z); }

Vec ZeroChainOracle::hvp_sample(const Vec& x, const Vec& v, CounterRng& z) const {
  return masked_hessian(x, z) * v;
}

ProgressTrace zero_respecting_run(ZeroChainOracle& oracle, uint64_t max_queries) {
  const int T = oracle.chain().length();
  const bool use_hessian = oracle.noiseless_gradient();
  const double unit = 1.0 / oracle.chain().beta();
  ProgressTrace tr;
  int k = 0;
  Vec x = Vec::Zero(T);
  while (k < T && tr.queries < max_queries) {
    bool revealed;
    if (use_hessian) {
      const Mat H = oracle.query_hess(x);
      revealed = H.row(k).cwiseAbs().maxCoeff() > 0.0;
    } else {
      revealed = oracle.query_grad(x)[k] != 0.0;
    }
    ++tr.queries;
    if (revealed) {
      x[k] = unit;
      ++k;
      tr.reveals.emplace_back(tr.queries, k);
    }
  }
  tr.final_progress = k;
  if (k == T) tr.full_progress_at = tr.queries;
  return tr;
}

double progress_deadline(int T, double rho, double delta) {
  return (double(T) - std::log(1.0 / delta)) / (2.0 * rho);
}

}  // namespace sosp
