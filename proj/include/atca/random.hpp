#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace atca {

using Rng = std::mt19937_64;

/// SplitMix64 finalizer.
constexpr std::uint64_t Mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Hashes a tuple of integers into a seed. Parallel work derives its stream
/// from its own coordinates so results never depend on scheduling.
constexpr std::uint64_t DeriveSeed(std::initializer_list<std::uint64_t> parts) {
  std::uint64_t h = 0x6a09e667f3bcc909ULL;
  for (std::uint64_t p : parts) h = Mix64(h ^ Mix64(p));
  return h;
}

}  // namespace atca
