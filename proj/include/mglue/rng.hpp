#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>

namespace mglue {

/// Stafford variant-13 finalizer used by SplitMix64.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Purpose tags for independent random substreams. Every random quantity of
/// the construction is drawn from the substream (master seed, tag, index), so
/// two runs that share a seed share exactly the same randomness per index.
enum class StreamTag : std::uint64_t {
  block_content = 1,  // law of the unscaled block B_n
  mark_point = 2,     // Z_n
  mark_coin = 3,      // U_n
  attach = 4,         // (I_n, P_n)
  replica = 5,
  net = 6,
  probe = 7,
  generation = 8,
  substructure = 9,
  layout = 10,
  chi = 11,
};

/// SplitMix64 engine. Satisfies UniformRandomBitGenerator, but all
/// conversions below are done by hand so results are bit-identical across
/// standard libraries.
class Stream {
 public:
  using result_type = std::uint64_t;

  explicit Stream(std::uint64_t seed) noexcept : state_(seed) {}
  Stream(std::uint64_t master, StreamTag tag, std::uint64_t index) noexcept
      : state_(mix64(mix64(master ^ 0x6a09e667f3bcc909ULL) ^
                     mix64(static_cast<std::uint64_t>(tag) * 0x9e3779b97f4a7c15ULL + index))) {}

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

  result_type operator()() noexcept {
    state_ += 0x9e3779b97f4a7c15ULL;
    return mix64(state_);
  }

  /// Uniform on the open interval (0, 1).
  double uniform() noexcept {
    return (static_cast<double>((*this)() >> 11) + 0.5) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [0, n), n > 0 (Lemire's multiply-shift, unbiased).
  std::uint64_t below(std::uint64_t n) noexcept {
    std::uint64_t x = (*this)();
    __uint128_t m = static_cast<__uint128_t>(x) * n;
    auto low = static_cast<std::uint64_t>(m);
    if (low < n) {
      const std::uint64_t threshold = (0 - n) % n;
      while (low < threshold) {
        x = (*this)();
        m = static_cast<__uint128_t>(x) * n;
        low = static_cast<std::uint64_t>(m);
      }
    }
    return static_cast<std::uint64_t>(m >> 64);
  }

  /// Number of failures before the first success of Bernoulli(p) trials.
  /// Saturates at the largest representable count.
  std::uint64_t geometric(double p) noexcept {
    if (p >= 1.0) return 0;
    if (p <= 0.0) return std::numeric_limits<std::uint64_t>::max();
    const double g = std::floor(std::log(uniform()) / std::log1p(-p));
    if (!(g < 1.8e19)) return std::numeric_limits<std::uint64_t>::max();
    return static_cast<std::uint64_t>(g);
  }

 private:
  std::uint64_t state_;
};

/// Seed for the i-th Monte Carlo replica of a run with the given master seed.
inline std::uint64_t replica_seed(std::uint64_t master, std::uint64_t replica) noexcept {
  return Stream(master, StreamTag::replica, replica)();
}

}  // namespace mglue
