// io.hpp
// Field snapshot container, atomic file output and checksums.
//
// Snapshot layout: one line of JSON header terminated by '\n', followed by
// nx*ny complex coefficients as interleaved little-endian float64 (re, im),
// row-major with eta outer and xi inner, centered ordering. The header carries
// the grid, the time stamp and the normalization tag "paper-1/(2pi)".
#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "cylnls/spectral_domain.hpp"

namespace cylnls {

inline constexpr std::string_view kNormalizationTag = "paper-1/(2pi)";
inline constexpr std::string_view kSnapshotFormat = "cylnls-snapshot";
inline constexpr int kSnapshotVersion = 1;

struct Snapshot {
  SpectralField field;
  double time = 0.0;
};

void save_snapshot(const std::filesystem::path& path, const SpectralField& field, double time);

/// Throws IoError on unreadable files, format or normalization mismatch.
Snapshot load_snapshot(const std::filesystem::path& path);

/// Writes to a sibling temporary and renames over the target.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

std::string read_file(const std::filesystem::path& path);

/// Lower-case hex SHA-256 of a byte string / file.
std::string sha256_hex(std::string_view bytes);
std::string sha256_file(const std::filesystem::path& path);

}  // namespace cylnls
