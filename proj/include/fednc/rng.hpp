#pragma once

// Deterministic random streams. Every stochastic component draws from an
// Rng derived via seed_stream(root, labels...), so results do not depend
// on scheduling or on the standard library's distribution internals.

#include <array>
#include <cmath>
#include <cstdint>
#include <string_view>
#include <vector>

namespace fednc {

namespace detail {

// splitmix64 finalizer; full-avalanche mix used for seeding and label folding.
inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline std::uint64_t fold_label(std::uint64_t h, std::uint64_t v) {
  return mix64(h ^ (v * 0xff51afd7ed558ccdULL + 0x2545f4914f6cdd1dULL));
}

inline std::uint64_t fold_label(std::uint64_t h, std::string_view s) {
  std::uint64_t acc = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) acc = (acc ^ c) * 0x100000001b3ULL;
  return fold_label(h, acc);
}

inline std::uint64_t fold_label(std::uint64_t h, int v) {
  return fold_label(h, static_cast<std::uint64_t>(v));
}

inline std::uint64_t fold_label(std::uint64_t h, const char* s) {
  return fold_label(h, std::string_view(s));
}

}  // namespace detail

// xoshiro256** seeded through splitmix64.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) {
    std::uint64_t x = seed;
    for (auto& word : state_) {
      x += 0x9e3779b97f4a7c15ULL;
      word = detail::mix64(x);
    }
  }

  std::uint64_t next_u64() {
    const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

  // Uniform in [0, n) by rejection; exact for any n >= 1.
  std::uint64_t next_below(std::uint64_t n) {
    const std::uint64_t limit = n * (~std::uint64_t{0} / n);
    std::uint64_t x = next_u64();
    while (x >= limit) x = next_u64();
    return x % n;
  }

  // Uniform s-bit symbol; high bits of the generator output, exact for
  // power-of-two ranges.
  std::uint32_t next_bits(unsigned bits) {
    return static_cast<std::uint32_t>(next_u64() >> (64 - bits));
  }

  // Uniform double in [0, 1) with 53 random bits.
  double next_real() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  bool next_bernoulli(double p) { return next_real() < p; }

  // Box-Muller; second variate cached.
  double next_gaussian() {
    if (have_cached_) {
      have_cached_ = false;
      return cached_;
    }
    double u1 = next_real();
    while (u1 <= 0.0) u1 = next_real();
    const double u2 = next_real();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * 3.14159265358979323846 * u2;
    cached_ = r * std::sin(theta);
    have_cached_ = true;
    return r * std::cos(theta);
  }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::swap(v[i - 1], v[next_below(i)]);
    }
  }

  // k distinct values from [0, n), ascending.
  std::vector<int> sample_without_replacement(int n, int k);

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
  }

  std::array<std::uint64_t, 4> state_{};
  double cached_ = 0.0;
  bool have_cached_ = false;
};

// Derives an independent reproducible sub-stream from a root seed and a
// label path, e.g. seed_stream(seed, "round", t, "client", k).
template <typename... Labels>
std::uint64_t derive_seed(std::uint64_t root, Labels&&... labels) {
  std::uint64_t h = detail::mix64(root ^ 0xa0761d6478bd642fULL);
  ((h = detail::fold_label(h, std::forward<Labels>(labels))), ...);
  return h;
}

template <typename... Labels>
Rng seed_stream(std::uint64_t root, Labels&&... labels) {
  return Rng(derive_seed(root, std::forward<Labels>(labels)...));
}

}  // namespace fednc
