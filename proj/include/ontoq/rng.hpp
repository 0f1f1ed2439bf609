#pragma once

// Seeded, platform-independent random streams.
//
// The engine is std::mt19937_64, whose output sequence is fixed by the C++
// standard. Integers in [0, n) are produced by rejection sampling rather than
// std::uniform_int_distribution (whose algorithm is implementation-defined),
// so every table generated from a seed is bit-identical on every platform.
//
// Stream splitting: the stream for item `index` of a run with `master` seed
// is seeded with stream_seed(master, index). Nothing else feeds the stream,
// which makes parallel runs independent of scheduling.

#include <cstdint>
#include <random>

namespace ontoq::rng {

using engine = std::mt19937_64;

constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t stream_seed(std::uint64_t master, std::uint64_t index) noexcept {
  return splitmix64(master ^ splitmix64(index ^ 0x6a09e667f3bcc909ULL));
}

inline engine make_stream(std::uint64_t master, std::uint64_t index) {
  return engine(stream_seed(master, index));
}

// Uniform integer in [0, n); n must be positive.
inline std::uint64_t uniform_below(engine& g, std::uint64_t n) {
  // 2^64 mod n: draws below it would bias the low residues.
  const std::uint64_t threshold = (0 - n) % n;
  std::uint64_t r;
  do {
    r = g();
  } while (r < threshold);
  return r % n;
}

// Uniform double in [0, 1) with 53 random bits.
inline double uniform_unit(engine& g) {
  return static_cast<double>(g() >> 11) * 0x1.0p-53;
}

}  // namespace ontoq::rng
