// Seed plumbing. All randomness in the toolkit flows from one root seed that
// is split per subsystem and per item, so results do not depend on the order
// or thread in which items are processed.

#ifndef RESTORO_RANDOM_H_
#define RESTORO_RANDOM_H_

#include <cstdint>
#include <random>
#include <string_view>

namespace restoro {

using Rng = std::mt19937_64;

std::uint64_t derive_seed(std::uint64_t root, std::string_view tag);
std::uint64_t derive_seed(std::uint64_t root, std::uint64_t index);

// Uniform in [0, 1) from the top 53 bits of one draw.
inline double uniform01(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Uniform integer in [lo, hi].
int uniform_int(Rng& rng, int lo, int hi);

}  // namespace restoro

#endif  // RESTORO_RANDOM_H_
