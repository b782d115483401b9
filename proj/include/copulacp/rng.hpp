#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace copulacp {

using Rng = std::mt19937_64;

/// Stream tags used as the first path element of derived seeds so that data,
/// multiplier and experiment streams never collide.
enum class StreamTag : std::uint64_t {
  data = 1,
  multiplier = 2,
  test = 3,
};

std::uint64_t splitmix64(std::uint64_t x) noexcept;

/// Counter-based substream derivation. The seed for a path (a, b, c, ...) is obtained by
/// folding splitmix64 over the master seed and each path element, so any
/// (cell, replication, multiplier-replicate) triple maps to a fixed engine state
/// independent of evaluation order or thread count.
std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> path) noexcept;

inline Rng substream(std::uint64_t master, std::initializer_list<std::uint64_t> path) {
  return Rng{derive_seed(master, path)};
}

}  // namespace copulacp
