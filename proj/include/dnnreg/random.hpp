#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace dnnreg {

using Rng = std::mt19937_64;

/// Independent generator derived from a master seed and a path of labels
/// (replication index, grid cell, doubling index, ...). The same
/// (master, path) always yields the same stream.
Rng substream(std::uint64_t master, std::initializer_list<std::uint64_t> path);

/// Labels used as the first path element, so that streams for different
/// purposes never collide.
namespace stream {
inline constexpr std::uint64_t data = 0x64617461;    // dataset draws
inline constexpr std::uint64_t fit = 0x666974;       // weight initialization
inline constexpr std::uint64_t grid = 0x67726964;    // per grid cell
inline constexpr std::uint64_t attempt = 0x617474;   // per doubling index
}  // namespace stream

}  // namespace dnnreg
