#pragma once

#include <cstdint>
#include <filesystem>

#include "specaudit/dsp.hpp"
#include "specaudit/types.hpp"

namespace specaudit::io {

/// 8-bit spectrogram pixels; the on-disk PGM payload and, dequantized,
/// the exact values the network consumes.
using PixelGrid =
    Eigen::Matrix<std::uint8_t, dsp::kSpectroRows, dsp::kSpectroCols>;

/// byte = round(value * 255).
PixelGrid quantize(const dsp::Spectrogram& spec);

/// value = byte / 255. quantize(dequantize(g)) == g for every grid.
dsp::Spectrogram dequantize(const PixelGrid& grid);

/// Binary PGM (P5), 34 wide x 50 tall, maxval 255. Image convention:
/// file row 0 is the highest frequency band.
void write_pgm(const PixelGrid& grid, const std::filesystem::path& path);
PixelGrid read_pgm(const std::filesystem::path& path);

/// Row-major CSV with 9 significant digits per entry.
void write_matrix_csv(const matrix_t& m, const std::filesystem::path& path);

/// "%.9g" formatting used for every numeric text output.
std::string format_g9(double v);

}  // namespace specaudit::io
