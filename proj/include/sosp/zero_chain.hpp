#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "sosp/chain.hpp"

namespace sosp {

// Probability-rho zero-chain oracle over a (scaled) chain.  Each query draws
// z ~ Bernoulli(rho) once.  Gradient coordinates i > prog(beta x) are scaled
// by z/rho; Hessian entries (i, j) with max(i, j) > prog(beta x) are scaled by
// z/rho, which keeps every answer symmetric.  With a noiseless gradient the
// gradient channel is exact.
class ZeroChainOracle final : public StochasticOracle {
 public:
  ZeroChainOracle(const ChainInstance& inst, uint64_t seed);
  const ChainFunction& chain() const { return *chain_; }
  double rho() const { return rho_; }
  double threshold() const { return threshold_; }
  bool noiseless_gradient() const { return noiseless_; }
  // Progress of the query point in unscaled coordinates.
  int progress(const Vec& x) const { return prog(chain_->beta() * x, threshold_); }
  std::optional<double> hessian_noise_bound() const override;

 protected:
  Vec grad_sample(const Vec& x, CounterRng& z) const override;
  Vec hvp_sample(const Vec& x, const Vec& v, CounterRng& z) const override;
  Mat hess_sample(const Vec& x, CounterRng& z) const override;

 private:
  Mat masked_hessian(const Vec& x, CounterRng& z) const;
  std::shared_ptr<const ChainFunction> chain_;
  double rho_;
  double threshold_;
  bool noiseless_;
  double hess_bound_;
};

struct ProgressTrace {
  std::vector<std::pair<uint64_t, int>> reveals;  // (query count, progress after the reveal)
  int final_progress = 0;
  uint64_t queries = 0;
  std::optional<uint64_t> full_progress_at;  // query count when progress reached T
};

// Greedy zero-respecting adversary: queries the point equal to 1 (unscaled)
// on the discovered support and 0 elsewhere, and extends the support whenever
// an answer is nonzero on the next coordinate.  Uses Hessian queries when the
// gradient channel is noiseless (order 2), gradient queries otherwise.
ProgressTrace zero_respecting_run(ZeroChainOracle& oracle, uint64_t max_queries);

// (T - ln(1/delta)) / (2 rho).
double progress_deadline(int T, double rho, double delta);

}  // namespace sosp
