#pragma once

#include <cstdint>
#include <random>

namespace fairprobe {

/// Seeded random source with portable distributions.
///
/// The engine is std::mt19937_64, whose output sequence is fixed by the
/// standard. The standard distributions are not, so integer and real draws are
/// implemented here to keep runs bit-identical across standard libraries.
/// A Rng is single-owner: one per search run or estimation trial.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed), seed_(seed) {}

  std::uint64_t seed() const { return seed_; }

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform integer in the closed range [lo, hi]. Requires lo <= hi.
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi);

  /// Uniform real in [0, 1) with 53 bits of precision.
  double uniform01();

  /// Uniform real in the open interval (lo, hi).
  double uniform_open(double lo, double hi);

  /// True with probability p (p clamped to [0, 1]).
  bool bernoulli(double p) { return uniform01() < p; }

  /// Independent substream keyed by `stream`. Does not advance this source.
  Rng derive(std::uint64_t stream) const;

 private:
  std::mt19937_64 engine_;
  std::uint64_t seed_;
};

/// splitmix64 finalizer, used for seed derivation.
std::uint64_t mix64(std::uint64_t x);

}  // namespace fairprobe
