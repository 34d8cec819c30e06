#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "mvid/sml.hpp"

namespace mvid {

inline constexpr std::uint32_t kCheckpointVersion = 1;

// Layout, all little-endian:
//   "SMLW", u32 version,
//   u32 extra-channel bits, 4 x u32 stage widths, u32 regress_shift,
//   u32 input_resolution, u32 tensor count,
//   per tensor: u32 name length, name bytes, u32 rank, rank x u32 dims,
//               u64 byte offset into the payload,
//   u64 payload bytes, payload of float32.
std::vector<std::uint8_t> serialize_checkpoint(const SmlWeights& weights);

// Throws kBadMagic, kVersionMismatch, or kCorruptDirectory (truncation,
// overlapping or out-of-range offsets, or a directory that does not match the
// architecture implied by the stored config).
SmlWeights deserialize_checkpoint(std::span<const std::uint8_t> bytes);

void write_checkpoint(const SmlWeights& weights, const std::filesystem::path& path);
SmlWeights read_checkpoint(const std::filesystem::path& path);

}  // namespace mvid
