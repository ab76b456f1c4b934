#pragma once

#include <cstdint>
#include <random>

namespace risloc {

// Deterministic substream seed from (seed, stream) via splitmix64 mixing.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

// Named stream ids so independent consumers never share a substream.
namespace streams {
inline constexpr std::uint64_t kRisProfile = 0x5249'5300;
inline constexpr std::uint64_t kClockBias = 0x4249'4153;
inline constexpr std::uint64_t kScatterers = 0x5343'4154;
inline constexpr std::uint64_t kNoise = 0x4e4f'4953;
}  // namespace streams

// mt19937_64 with hand-rolled distributions. std:: distributions are
// implementation-defined, so they would break cross-platform reproducibility.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  // [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  // Standard normal (Box-Muller, both outputs used).
  double normal();

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace risloc
