#pragma once

#include <cmath>
#include <cstdint>
#include <string_view>

namespace emgshift {

// Counter-based PRNG: each draw mixes (key, counter) through a strong 64-bit
// finalizer, so streams can be split by deriving child keys instead of
// sharing mutable state. Parallel consumers with distinct keys reproduce the
// serial run exactly.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t key = 0) : key_(key) {}

  // Derives an independent stream. Labels keep derivations stable across
  // code reorderings; numeric indices separate homogeneous children.
  [[nodiscard]] CounterRng split(std::string_view label, std::uint64_t index = 0) const {
    std::uint64_t k = key_;
    for (char c : label) k = mix(k ^ static_cast<std::uint64_t>(static_cast<unsigned char>(c)));
    return CounterRng(mix(k ^ mix(index ^ 0x9e3779b97f4a7c15ull)));
  }

  std::uint64_t next_u64() { return mix(key_ ^ counter_++); }

  // Uniform in [0, 1).
  double next_double() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * next_double(); }

  // Marsaglia polar method; caches the second deviate.
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u, v, s;
    do {
      u = 2.0 * next_double() - 1.0;
      v = 2.0 * next_double() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double m = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * m;
    have_spare_ = true;
    return u * m;
  }

  // Uniform integer in [0, n).
  std::uint64_t next_below(std::uint64_t n) {
    // Rejection sampling over the top bits keeps the distribution exact.
    const std::uint64_t limit = n * ((~0ull) / n);
    std::uint64_t x;
    do {
      x = next_u64();
    } while (x >= limit);
    return x % n;
  }

  template <class Vec>
  void shuffle(Vec& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      const std::size_t j = static_cast<std::size_t>(next_below(i));
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  // SplitMix64 finalizer (Stafford mix13).
  static std::uint64_t mix(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ull;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  std::uint64_t key_ = 0;
  std::uint64_t counter_ = 0;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace emgshift
