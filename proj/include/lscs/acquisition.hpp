#pragma once

// Line-by-line acquisition and the image / measurement file formats.

#include <filesystem>
#include <string>
#include <string_view>

#include "lscs/tensor_core.hpp"

namespace lscs {

// Row-major grayscale image. Pixels loaded from disk are scaled to [0, 1];
// reconstructed estimates may leave that range.
using Image = RowMatrix;

struct MeasurementSet {
  SensingEnsemble ensemble;
  RowMatrix y;  // n_row x m, row i holds Phi^i * x_i

  // Throws unless the ensemble is valid and y is n_row x m and finite.
  void validate() const;
};

// Takes M Gaussian measurements of every row, each row with its own matrix
// regenerated from `master_seed`.
MeasurementSet acquire(const Image& x, std::size_t m, std::uint64_t master_seed);

// PGM, P2 (plain) or P5 (raw, maxval <= 255). Pixel values are divided by
// maxval. Colour and 16-bit files are rejected.
Image load_pgm(const std::filesystem::path& path);
Image parse_pgm(std::string_view bytes);

// Writes P5 with maxval 255, rounding to nearest and clamping to [0, 255].
void write_pgm(const Image& image, const std::filesystem::path& path);
std::string encode_pgm(const Image& image);
// Plain (P2) variant of the same encoding.
std::string encode_pgm_plain(const Image& image);

// Measurement file, all fields little-endian:
//   "LSCS" | u16 version = 1 | u16 reserved = 0 | u64 master_seed |
//   u32 n_row | u32 n_col | u32 m | n_row*m binary64, row-major.
// Nothing may follow the payload.
inline constexpr std::string_view kMeasurementMagic = "LSCS";
inline constexpr std::uint16_t kMeasurementVersion = 1;
inline constexpr std::size_t kMeasurementHeaderBytes = 28;

std::string encode_measurements(const MeasurementSet& ms);
MeasurementSet decode_measurements(std::string_view bytes);
void write_measurements(const MeasurementSet& ms, const std::filesystem::path& path);
MeasurementSet read_measurements(const std::filesystem::path& path);

// File helpers shared with the benchmark and CLI layers.
std::string read_file(const std::filesystem::path& path);
// Writes to a temporary sibling and renames it over `path`, so a failure
// never leaves a partial file behind.
void write_file_atomic(const std::filesystem::path& path, std::string_view bytes);

}  // namespace lscs
