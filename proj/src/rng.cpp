#include "fairprobe/rng.hpp"

#include <cassert>

namespace fairprobe {

std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::int64_t Rng::uniform_int(std::int64_t lo, std::int64_t hi) {
  assert(lo <= hi);
  const auto span = static_cast<std::uint64_t>(hi) - static_cast<std::uint64_t>(lo);
  if (span == ~std::uint64_t{0}) return static_cast<std::int64_t>(engine_());
  const std::uint64_t range = span + 1;
  // Rejection sampling: discard the top partial bucket.
  const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % range) - 1;
  std::uint64_t draw = engine_();
  while (draw > limit) draw = engine_();
  return static_cast<std::int64_t>(static_cast<std::uint64_t>(lo) + draw % range);
}

double Rng::uniform01() {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double Rng::uniform_open(double lo, double hi) {
  for (;;) {
    const double x = lo + (hi - lo) * uniform01();
    if (x > lo && x < hi) return x;
  }
}

Rng Rng::derive(std::uint64_t stream) const {
  return Rng(mix64(seed_ ^ mix64(stream + 0x632be59bd9b4e019ULL)));
}

}  // namespace fairprobe
