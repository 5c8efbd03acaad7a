#pragma once

#include <cstdint>
#include <initializer_list>

namespace faithlab {

// SplitMix64 finalizer; used to derive independent seeds from a root seed and
// a tuple of stream identifiers, so results do not depend on execution order.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t derive_seed(std::uint64_t root, std::initializer_list<std::uint64_t> stream) {
  std::uint64_t state = mix64(root);
  for (auto id : stream) state = mix64(state ^ mix64(id + 0x632BE59BD9B4E019ULL));
  return state;
}

}  // namespace faithlab
