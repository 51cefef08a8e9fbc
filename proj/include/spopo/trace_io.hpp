#pragma once

#include <cstdint>
#include <filesystem>

#include "spopo/homodyne.hpp"

namespace spopo {

// Binary trace layout, little-endian, 64-byte header followed by n_samples
// IEEE-754 float32 samples:
//
//   offset  size  field
//        0     8  magic "SPOPOTRC"
//        8     4  uint32 format version (1)
//       12     4  uint32 moving-variance window, samples
//       16     8  float64 sample rate, Sa/s
//       24     8  uint64 n_samples
//       32     8  uint64 rng seed
//       40     8  float64 scan span, rad
//       48     8  float64 phase-scan nonlinearity alpha
//       56     8  float64 scan offset theta0, rad
inline constexpr char kTraceMagic[8] = {'S', 'P', 'O', 'P', 'O', 'T', 'R', 'C'};
inline constexpr std::uint32_t kTraceVersion = 1;
inline constexpr std::size_t kTraceHeaderSize = 64;

/// Write atomically (temporary file, then rename).
void write_trace(const std::filesystem::path& path, const HomodyneTrace& trace);

/// Throws FormatError carrying the byte offset of the first problem.
HomodyneTrace read_trace(const std::filesystem::path& path);

/// Two-column CSV (time_s, sample).
void write_trace_csv(const std::filesystem::path& path, const HomodyneTrace& trace);

}  // namespace spopo
