#include "copulacp/rng.hpp"

namespace copulacp {

std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> path) noexcept {
  std::uint64_t h = splitmix64(master);
  for (const std::uint64_t x : path) h = splitmix64(h ^ splitmix64(x + 0x632BE59BD9B4E019ULL));
  return h;
}

}  // namespace copulacp
