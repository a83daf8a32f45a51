#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>

namespace dps {

/// Seedable 64-bit generator. Stream `s` of seed `x` is mt19937_64 seeded through
/// std::seed_seq{lo(x), hi(x), lo(s), hi(s)}; variates are derived from raw 64-bit
/// draws by hand so results do not depend on the standard library's distributions.
class Rng {
 public:
  static constexpr std::string_view kAlgorithm =
      "mt19937_64/seed_seq(seed_lo,seed_hi,stream_lo,stream_hi)";

  explicit Rng(std::uint64_t seed, std::uint64_t stream = 0) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream),
                      static_cast<std::uint32_t>(stream >> 32)};
    engine_.seed(seq);
  }

  std::uint64_t next() { return engine_(); }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  double exponential(double rate) { return -std::log1p(-uniform()) / rate; }

  /// Uniform integer in [0, n).
  std::size_t index(std::size_t n) {
    return static_cast<std::size_t>(uniform() * static_cast<double>(n));
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace dps
