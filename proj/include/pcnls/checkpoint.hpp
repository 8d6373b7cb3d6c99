#pragma once

#include "pcnls/grid.hpp"

#include <filesystem>
#include <string>

namespace pcnls
{

/// Checkpoint layout, all little-endian:
///   0   char[8]  magic "PCNLSCK1"
///   8   uint32   dims N
///   12  uint32   points per axis M
///   16  float64  half width L
///   24  float64  time t
///   32  float32  (re, im) pairs, M^N of them, row-major, last axis fastest
inline constexpr char kCheckpointMagic[8] = {'P', 'C', 'N', 'L', 'S', 'C', 'K', '1'};
inline constexpr std::size_t kCheckpointHeaderBytes = 32;

void write_checkpoint(const std::filesystem::path& path, const Field& f);

/// Throws pcnls::Error on a bad magic, truncated payload or invalid grid.
Field read_checkpoint(const std::filesystem::path& path);

/// Checkpoint with the largest time in a directory; throws if none exists.
std::filesystem::path latest_checkpoint(const std::filesystem::path& dir);

} // namespace pcnls
