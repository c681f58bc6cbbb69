#pragma once

#include <cmath>
#include <cstdint>

namespace bsx {

// Counter-based PRNG. Every draw is a pure function of (seed, stream, index),
// so any consumer (or another language) can reproduce a stream without shared
// state. The construction is the splitmix64 finalizer over an affine counter;
// the exact constants are part of the file-format/reproducibility contract
// and are documented in the README.
namespace rng {

constexpr std::uint64_t kGamma = 0x9E3779B97F4A7C15ULL;
constexpr std::uint64_t kStreamSalt = 0xD1B54A32D192ED03ULL;

constexpr std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t bits(std::uint64_t seed, std::uint64_t stream,
                             std::uint64_t index) {
  const std::uint64_t base = mix64(seed ^ (kStreamSalt * (stream + 1)));
  return mix64(base + kGamma * (index + 1));
}

// Uniform in [0, 1).
inline double uniform(std::uint64_t seed, std::uint64_t stream,
                      std::uint64_t index) {
  return static_cast<double>(bits(seed, stream, index) >> 11) * 0x1.0p-53;
}

// Uniform in (0, 1]; safe as a log() argument.
inline double uniform_pos(std::uint64_t seed, std::uint64_t stream,
                          std::uint64_t index) {
  return static_cast<double>((bits(seed, stream, index) >> 11) + 1) * 0x1.0p-53;
}

// Standard normal via Box-Muller; draw i consumes counters 2i and 2i+1.
inline double normal(std::uint64_t seed, std::uint64_t stream,
                     std::uint64_t index) {
  const double u1 = uniform_pos(seed, stream, 2 * index);
  const double u2 = uniform(seed, stream, 2 * index + 1);
  return std::sqrt(-2.0 * std::log(u1)) *
         std::cos(2.0 * 3.14159265358979323846 * u2);
}

}  // namespace rng

// Stateful view over one (seed, stream) pair for call sites that just need a
// sequence of draws.
class RandomStream {
 public:
  RandomStream(std::uint64_t seed, std::uint64_t stream)
      : seed_(seed), stream_(stream) {}

  double uniform() { return rng::uniform(seed_, stream_, next_++); }
  double normal() { return rng::normal(seed_, stream_, next_++); }
  std::uint64_t bits() { return rng::bits(seed_, stream_, next_++); }

  // Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n) { return bits() % n; }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_;
  std::uint64_t next_ = 0;
};

}  // namespace bsx
