#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <random>

namespace xorlab {

// SplitMix64 finalizer. Used to derive independent stream seeds from a root
// seed and a tag; the output of distinct (seed, tag) pairs is effectively
// uncorrelated.
inline std::uint64_t mix64(std::uint64_t seed, std::uint64_t tag) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (tag + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Deterministic random stream. Wraps std::mt19937_64 (fully specified by the
// standard, so sequences are portable across platforms) and produces uniform
// and normal variates with a fixed, documented algorithm.
//
// Substreams are counter-based: substream(tag) depends only on the seed this
// Rng was constructed with, never on how far the parent stream has advanced.
// That makes per-sample substreams safe to generate in parallel with output
// independent of the parallelism degree.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : seed_(seed), gen_(mix64(seed, 0)) {}

  std::uint64_t seed() const { return seed_; }

  std::uint64_t next_u64() { return gen_(); }

  // Uniform in [0, 1) with 53 random bits.
  double uniform01() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  // Standard normal via Box-Muller on the uniform stream. Generates pairs;
  // the second value is cached for the next call.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = uniform01();
    double u2 = uniform01();
    // Guard u1 = 0 (log(0)); the replacement keeps the stream deterministic.
    if (u1 <= 0.0) u1 = 0x1.0p-53;
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * 3.14159265358979323846 * u2;
    spare_ = r * std::sin(theta);
    has_spare_ = true;
    return r * std::cos(theta);
  }

  // Uniform integer in [0, n), rejection-sampled so every residue is exact.
  std::uint64_t below(std::uint64_t n) {
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % n;
    std::uint64_t v = gen_();
    while (v >= limit) v = gen_();
    return v % n;
  }

  bool bernoulli(double p) { return uniform01() < p; }

  // Independent child stream. Depends only on (seed, tag).
  Rng substream(std::uint64_t tag) const { return Rng(mix64(seed_, tag)); }

 private:
  std::uint64_t seed_;
  std::mt19937_64 gen_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace xorlab
