#include "sosp/rng.hpp"

#include <cmath>
#include <numbers>

namespace sosp {

namespace {
constexpr uint64_t kGolden = 0x9E3779B97F4A7C15ULL;
constexpr uint64_t kStreamSalt = 0xD1B54A32D192ED03ULL;
}  // namespace

uint64_t mix64(uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

uint64_t derive_seed(uint64_t master, std::string_view label,
                     std::initializer_list<uint64_t> indices) {
  uint64_t h = 0xCBF29CE484222325ULL;
  for (unsigned char c : label) {
    h ^= c;
    h *= 0x100000001B3ULL;
  }
  uint64_t s = mix64(master ^ mix64(h));
  for (uint64_t i : indices) s = mix64(s ^ mix64(i + kStreamSalt));
  return s;
}

uint64_t CounterRng::next_u64() { return mix64(key_ + kGolden * (++counter_)); }

CounterRng CounterRng::substream(uint64_t index) const {
  return CounterRng(mix64(key_ ^ mix64(index + kStreamSalt)));
}

double CounterRng::uniform() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double CounterRng::uniform_open() {
  return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
}

double CounterRng::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  const double r = std::sqrt(-2.0 * std::log(uniform_open()));
  const double a = 2.0 * std::numbers::pi * uniform();
  spare_ = r * std::sin(a);
  has_spare_ = true;
  return r * std::cos(a);
}

int CounterRng::rademacher() { return (next_u64() >> 63) ? 1 : -1; }

bool CounterRng::bernoulli(double p) { return uniform() < p; }

uint64_t CounterRng::below(uint64_t n) {
  // Lemire's multiply-shift with rejection.
  uint64_t x = next_u64();
  __uint128_t m = static_cast<__uint128_t>(x) * n;
  uint64_t l = static_cast<uint64_t>(m);
  if (l < n) {
    const uint64_t t = (0 - n) % n;
    while (l < t) {
      x = next_u64();
      m = static_cast<__uint128_t>(x) * n;
      l = static_cast<uint64_t>(m);
    }
  }
  return static_cast<uint64_t>(m >> 64);
}

Vec CounterRng::normal_vector(int d) {
  Vec v(d);
  for (int i = 0; i < d; ++i) v[i] = normal();
  return v;
}

Vec CounterRng::unit_vector(int d) {
  for (;;) {
    Vec v = normal_vector(d);
    const double n = v.norm();
    if (n > 0.0) return v / n;
  }
}

}  // namespace sosp
