#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <vector>

#include "siamaug/common.hpp"

namespace siamaug {

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline std::uint64_t rotl64(std::uint64_t x, int k) {
  return (x << k) | (x >> (64 - k));
}

}  // namespace detail

// Self-contained xoshiro256** generator. Sampling helpers avoid
// std::uniform_*_distribution so that seeded streams are identical across
// standard library implementations, which keeps every seeded artifact
// byte-reproducible.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : seed_(seed) {
    std::uint64_t sm = seed;
    for (auto& word : state_) word = detail::splitmix64(sm);
  }

  std::uint64_t next_u64() {
    const std::uint64_t result = detail::rotl64(state_[1] * 5, 7) * 9;
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = detail::rotl64(state_[3], 45);
    return result;
  }

  // Unbiased integer in [0, n). n must be positive.
  std::uint64_t below(std::uint64_t n) {
    if (n == 0) throw ContractError("Rng::below requires n > 0");
    // rejection sampling on the top of the range
    const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
    std::uint64_t v = next_u64();
    while (v >= limit) v = next_u64();
    return v % n;
  }

  std::size_t index(std::size_t n) { return static_cast<std::size_t>(below(n)); }

  // Uniform double in [0, 1), 53 bits of precision.
  double real01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * real01(); }

  // Standard normal via Box-Muller; uncached so the stream stays a pure
  // function of the call sequence.
  double normal() {
    const double u1 = 1.0 - real01();
    const double u2 = real01();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.28318530717958647692 * u2);
  }

  bool flip(double p) { return real01() < p; }

  template <typename T>
  const T& pick(const std::vector<T>& items) {
    if (items.empty()) throw ContractError("Rng::pick on empty vector");
    return items[index(items.size())];
  }

  // Child generator derived from the original seed and a stream id. Forking
  // does not consume parent state, so fork(k) means the same thing no matter
  // how much the parent has been used.
  Rng fork(std::uint64_t stream) const {
    std::uint64_t sm = seed_ ^ (0x6a09e667f3bcc909ULL + stream * 0x9e3779b97f4a7c15ULL);
    return Rng(detail::splitmix64(sm));
  }

  std::uint64_t seed() const { return seed_; }

 private:
  std::uint64_t seed_;
  std::array<std::uint64_t, 4> state_;
};

}  // namespace siamaug
