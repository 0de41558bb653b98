#pragma once

#include <cstdint>
#include <limits>

namespace chemotax {

// SplitMix64 finaliser; a bijective 64-bit mixer.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

// SplitMix64 generator; satisfies UniformRandomBitGenerator.
class SplitMix64 {
 public:
  using result_type = std::uint64_t;

  explicit constexpr SplitMix64(std::uint64_t state) noexcept : state_(state) {}

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

  constexpr result_type operator()() noexcept {
    state_ += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  // Uniform double in [0, 1) with 53 random bits.
  double uniform() noexcept { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

 private:
  std::uint64_t state_;
};

// One realisation's random stream. Draws are addressed by (step, site) rather than consumed
// sequentially, so a step's sites can be sampled in any order or concurrently and the
// trajectory is a pure function of (seed, stream_id).
struct RngStream {
  std::uint64_t seed = 0;
  std::uint64_t stream_id = 0;

  SplitMix64 engine_for(std::uint64_t step, std::uint64_t site) const noexcept {
    std::uint64_t k = mix64(seed ^ 0x243F6A8885A308D3ULL);
    k = mix64(k ^ stream_id);
    k = mix64(k ^ step);
    k = mix64(k ^ site);
    return SplitMix64{k};
  }
};

}  // namespace chemotax
