#pragma once

// SplitMix64 (Steele, Lea & Flood 2014). State advances by the golden-ratio
// increment 0x9E3779B97F4A7C15; output is the standard 30/27/31 xor-shift
// multiply finalizer. All shuffles in the project use `shuffle` below, which
// is a descending Fisher-Yates pass drawing j = bounded(i + 1) for
// i = n-1 .. 1. `bounded(n)` rejects draws below (2^64 - n) mod n and returns
// the remainder of the accepted draw. `uniform()` maps the top 53 bits to
// [0, 1). These definitions are stable so ports can reproduce a stream.

#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

namespace hyperpipe {

class SplitMix64 {
 public:
  using result_type = std::uint64_t;

  explicit SplitMix64(std::uint64_t seed) noexcept : state_(seed) {}

  std::uint64_t next() noexcept {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  std::uint64_t operator()() noexcept { return next(); }
  static constexpr std::uint64_t min() noexcept { return 0; }
  static constexpr std::uint64_t max() noexcept { return ~std::uint64_t{0}; }

  /// Uniform integer in [0, n). n must be positive.
  std::uint64_t bounded(std::uint64_t n) noexcept {
    const std::uint64_t threshold = (0 - n) % n;
    for (;;) {
      const std::uint64_t r = next();
      if (r >= threshold) return r % n;
    }
  }

  /// Uniform double in [0, 1).
  double uniform() noexcept { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  /// Independent child generator; leaves this stream advanced by one draw.
  SplitMix64 split() noexcept { return SplitMix64(next()); }

 private:
  std::uint64_t state_;
};

template <typename T>
void shuffle(std::span<T> items, SplitMix64& rng) {
  for (std::size_t i = items.size(); i > 1; --i) {
    const auto j = static_cast<std::size_t>(rng.bounded(i));
    using std::swap;
    swap(items[i - 1], items[j]);
  }
}

template <typename T>
void shuffle(std::vector<T>& items, SplitMix64& rng) {
  shuffle(std::span<T>(items), rng);
}

/// [0, n) in seed-determined order.
inline std::vector<std::size_t> permutation(std::size_t n, SplitMix64& rng) {
  std::vector<std::size_t> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = i;
  shuffle(out, rng);
  return out;
}

}  // namespace hyperpipe
