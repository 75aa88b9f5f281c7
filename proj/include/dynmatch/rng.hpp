#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <limits>
#include <random>

namespace dynmatch {

// SplitMix64 finalizer; used for seed derivation and pair hashing.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t base, std::initializer_list<std::uint64_t> path) noexcept {
  std::uint64_t h = mix64(base);
  for (auto p : path) h = mix64(h ^ mix64(p + 0x632be59bd9b4e019ULL));
  return h;
}

// Top 53 bits of a 64-bit word mapped to [0, 1).
constexpr double to_unit(std::uint64_t x) noexcept {
  return static_cast<double>(x >> 11) * 0x1.0p-53;
}

/// Thin wrapper over mt19937_64 with platform-independent variate generation
/// (the std distributions are implementation-defined, which would break
/// cross-toolchain replay).
class Rng {
public:
  explicit Rng(std::uint64_t seed) : engine_(mix64(seed)) {}

  double uniform() { return to_unit(engine_()); }

  // Exp(rate); rate == +inf gives 0, rate == 0 gives +inf.
  double exponential(double rate) {
    if (rate == 0.0) return std::numeric_limits<double>::infinity();
    if (std::isinf(rate)) return 0.0;
    return -std::log1p(-uniform()) / rate;
  }

  // Uniform index in [0, n). Lemire's multiply-shift with rejection.
  std::size_t index(std::size_t n) {
    const std::uint64_t bound = n;
    std::uint64_t x = engine_();
    __uint128_t prod = static_cast<__uint128_t>(x) * bound;
    auto low = static_cast<std::uint64_t>(prod);
    if (low < bound) {
      const std::uint64_t threshold = (0 - bound) % bound;
      while (low < threshold) {
        x = engine_();
        prod = static_cast<__uint128_t>(x) * bound;
        low = static_cast<std::uint64_t>(prod);
      }
    }
    return static_cast<std::size_t>(prod >> 64);
  }

  std::uint64_t next() { return engine_(); }

private:
  std::mt19937_64 engine_;
};

// Independent RNG streams of one run; each purpose draws from its own stream
// so that policies sharing a seed see the same arrivals and lifetimes.
enum class Stream : std::uint64_t {
  Arrivals = 1,
  Lifetimes = 2,
  Clocks = 3,
  Policy = 4,
  Reports = 5,
  Oracle = 6,
  Probe = 7,
};

inline Rng make_stream(std::uint64_t seed, Stream s) {
  return Rng(derive_seed(seed, {static_cast<std::uint64_t>(s)}));
}

}  // namespace dynmatch
