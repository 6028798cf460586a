#include "specaudit/image_io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <string>

#include "specaudit/error.hpp"

namespace specaudit::io {

PixelGrid quantize(const dsp::Spectrogram& spec) {
  PixelGrid g;
  for (index_t r = 0; r < dsp::kSpectroRows; ++r) {
    for (index_t c = 0; c < dsp::kSpectroCols; ++c) {
      g(r, c) = static_cast<std::uint8_t>(std::lround(spec.pixels(r, c) * 255.0));
    }
  }
  return g;
}

dsp::Spectrogram dequantize(const PixelGrid& grid) {
  dsp::Spectrogram s;
  for (index_t r = 0; r < dsp::kSpectroRows; ++r) {
    for (index_t c = 0; c < dsp::kSpectroCols; ++c) {
      s.pixels(r, c) = static_cast<scalar_t>(grid(r, c)) / 255.0;
    }
  }
  return s;
}

void write_pgm(const PixelGrid& grid, const std::filesystem::path& path) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) {
    throw Error(ErrorCode::MalformedContainer,
                "cannot write '" + path.string() + "'");
  }
  f << "P5\n" << dsp::kSpectroCols << " " << dsp::kSpectroRows << "\n255\n";
  // Internal row 0 is the lowest frequency; the image is written top-down.
  for (index_t r = dsp::kSpectroRows - 1; r >= 0; --r) {
    for (index_t c = 0; c < dsp::kSpectroCols; ++c) {
      f.put(static_cast<char>(grid(r, c)));
    }
  }
}

PixelGrid read_pgm(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) {
    throw Error(ErrorCode::MalformedContainer,
                "cannot open '" + path.string() + "'");
  }
  std::string magic;
  long width = 0, height = 0, maxval = 0;
  f >> magic >> width >> height >> maxval;
  if (!f || magic != "P5" || width != dsp::kSpectroCols ||
      height != dsp::kSpectroRows || maxval != 255) {
    throw Error(ErrorCode::MalformedContainer,
                "'" + path.string() + "' is not a 34x50 8-bit PGM");
  }
  f.get();  // single whitespace after maxval
  PixelGrid g;
  for (index_t r = dsp::kSpectroRows - 1; r >= 0; --r) {
    for (index_t c = 0; c < dsp::kSpectroCols; ++c) {
      const int byte = f.get();
      if (byte == EOF) {
        throw Error(ErrorCode::MalformedContainer,
                    "'" + path.string() + "' is truncated");
      }
      g(r, c) = static_cast<std::uint8_t>(byte);
    }
  }
  return g;
}

std::string format_g9(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}

void write_matrix_csv(const matrix_t& m, const std::filesystem::path& path) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) {
    throw Error(ErrorCode::MalformedContainer,
                "cannot write '" + path.string() + "'");
  }
  for (index_t r = 0; r < m.rows(); ++r) {
    for (index_t c = 0; c < m.cols(); ++c) {
      if (c) f << ',';
      f << format_g9(m(r, c));
    }
    f << '\n';
  }
}

}  // namespace specaudit::io
