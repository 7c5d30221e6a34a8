#ifndef BCMAC_RNG_HPP
#define BCMAC_RNG_HPP

#include <cstdint>

namespace bcmac {

// SplitMix64 stream. Small, fast, and stable across platforms, which is what
// the reproducibility contract needs (std::uniform_real_distribution is
// implementation-defined and would break byte-identical output across
// toolchains).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  // Uniform in [0, 1), 53-bit resolution.
  double next_unit() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  bool bernoulli(double p) { return next_unit() < p; }

  double uniform(double lo, double hi) { return lo + next_unit() * (hi - lo); }

 private:
  std::uint64_t state_;
};

// Named substreams. Every consumer of randomness (channel evolution, sensing
// noise, scenario sampling) gets its own stream derived from
// (base seed, run index, purpose, channel index), so adding or removing a
// protocol never perturbs channel realizations and paired comparisons stay
// exact.
enum class StreamPurpose : std::uint64_t {
  Scenario = 1,
  Evolution = 2,
  Sensing = 3,
};

inline std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

inline Rng derive_stream(std::uint64_t base_seed, std::uint64_t run,
                         StreamPurpose purpose, std::uint64_t channel = 0) {
  std::uint64_t h = base_seed;
  h = mix64(h ^ mix64(0x517CC1B727220A95ULL + run));
  h = mix64(h ^ mix64(0x6C62272E07BB0142ULL + static_cast<std::uint64_t>(purpose)));
  h = mix64(h ^ mix64(0x2545F4914F6CDD1DULL + channel));
  return Rng(h);
}

}  // namespace bcmac

#endif  // BCMAC_RNG_HPP
