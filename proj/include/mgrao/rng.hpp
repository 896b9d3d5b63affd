#pragma once

#include <cstdint>
#include <random>

namespace mgrao {

// Named random streams derived from one root seed. Keeping streams separate
// means e.g. churn draws never shift allocation draws, so paired runs that
// share a seed stay aligned across algorithm variants.
enum class RngStream : std::uint64_t {
  kWorld = 1,       // system construction (task types, resources, preferences)
  kChurn = 2,       // parent leave/rejoin draws
  kAllocation = 3,  // child-selection exploration draws
};

// splitmix64 finaliser; decorrelates (root, stream) pairs well enough for
// seeding independent mt19937_64 engines.
inline std::uint64_t mix_seed(std::uint64_t root, std::uint64_t stream) {
  std::uint64_t z = root + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline std::mt19937_64 make_rng(std::uint64_t root, RngStream stream) {
  return std::mt19937_64(mix_seed(root, static_cast<std::uint64_t>(stream)));
}

}  // namespace mgrao
