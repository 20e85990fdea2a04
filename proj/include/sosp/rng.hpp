#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <initializer_list>
#include <limits>
#include <string_view>

namespace sosp {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

uint64_t mix64(uint64_t z);

// FNV-1a of the label folded with each index through mix64.
uint64_t derive_seed(uint64_t master, std::string_view label,
                     std::initializer_list<uint64_t> indices = {});

// Counter-based generator: output k is mix64(key + k * golden).  A stream is
// identified by its 64-bit key alone, so substreams can be derived without
// touching the parent state.
class CounterRng {
 public:
  using result_type = uint64_t;

  explicit CounterRng(uint64_t key = 0) : key_(key) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<uint64_t>::max(); }
  result_type operator()() { return next_u64(); }

  uint64_t next_u64();
  CounterRng substream(uint64_t index) const;

  double uniform();       // [0, 1)
  double uniform_open();  // (0, 1)
  double normal();
  int rademacher();
  bool bernoulli(double p);
  uint64_t below(uint64_t n);  // uniform on {0, ..., n-1}
  Vec normal_vector(int d);
  Vec unit_vector(int d);

  uint64_t key() const { return key_; }
  uint64_t draws() const { return counter_; }

 private:
  uint64_t key_;
  uint64_t counter_ = 0;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace sosp
