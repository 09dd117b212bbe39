#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace ehdcs {

using Rng = std::mt19937_64;

// Counter-based seed derivation: a trial's streams depend only on
// (master, trial, stream, sub), never on scheduling order.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t trial,
                          std::uint64_t stream = 0, std::uint64_t sub = 0);

std::uint64_t splitmix64(std::uint64_t x);

// 64-bit FNV-1a, used for configuration digests.
std::uint64_t fnv1a64(std::string_view bytes);

namespace streams {
inline constexpr std::uint64_t ensemble = 1;
inline constexpr std::uint64_t energy = 2;
inline constexpr std::uint64_t sensing = 3;
inline constexpr std::uint64_t window = 4;
}  // namespace streams

}  // namespace ehdcs
