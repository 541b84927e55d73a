#pragma once

#include <cstdint>
#include <initializer_list>

// Counter-based randomness. Every draw is a pure function of its keys, so any
// (seed, epoch, node, ...) tuple reproduces the same value regardless of the
// order in which the simulator visits nodes.

namespace fair::rng {

constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t hash(std::initializer_list<std::uint64_t> keys) noexcept {
  std::uint64_t h = 0x8f1bbcdcca62c1d6ULL;
  for (std::uint64_t k : keys) h = splitmix64(h ^ splitmix64(k));
  return h;
}

// Uniform in [0, 1) with 53 bits of resolution.
constexpr double uniform(std::initializer_list<std::uint64_t> keys) noexcept {
  return static_cast<double>(hash(keys) >> 11) * 0x1.0p-53;
}

// Stream tags keep draws for different purposes independent.
enum class Stream : std::uint64_t {
  kCluster = 1,
  kElection = 2,
  kSensing = 3,
  kCompromise = 4,
  kNaiveFactor = 5,
  kLink = 6,
  kRepetition = 7,
};

constexpr std::uint64_t tag(Stream s) noexcept { return static_cast<std::uint64_t>(s); }

}  // namespace fair::rng
