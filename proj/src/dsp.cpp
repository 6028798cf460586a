#include "specaudit/dsp.hpp"

#include <cmath>
#include <numbers>
#include <vector>

#include "specaudit/error.hpp"

namespace specaudit::dsp {
namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

bool is_power_of_two(index_t n) { return n >= 1 && (n & (n - 1)) == 0; }

}  // namespace

const char* window_name(Window w) {
  return w == Window::Hann ? "hann" : "rect";
}

ComplexSpectrum dft_naive(Eigen::Ref<const vector_t> frame) {
  const index_t n = frame.size();
  if (n < 1) throw Error(ErrorCode::EmptyFrame, "DFT of an empty frame");

  // exp(-i 2 pi m k / N) only depends on (m*k) mod N; a table of the N
  // distinct roots keeps the sum cheap and accurate.
  std::vector<std::complex<scalar_t>> roots(static_cast<std::size_t>(n));
  for (index_t k = 0; k < n; ++k) {
    roots[static_cast<std::size_t>(k)] =
        std::polar(1.0, -kTwoPi * static_cast<double>(k) / static_cast<double>(n));
  }

  ComplexSpectrum out(n);
  for (index_t m = 0; m < n; ++m) {
    std::complex<scalar_t> acc(0.0, 0.0);
    for (index_t k = 0; k < n; ++k) {
      acc += frame[k] * roots[static_cast<std::size_t>((m * k) % n)];
    }
    out[m] = acc;
  }
  return out;
}

ComplexSpectrum fft_radix2(Eigen::Ref<const vector_t> frame) {
  const index_t n = frame.size();
  if (n < 2 || !is_power_of_two(n)) {
    throw Error(ErrorCode::NotPowerOfTwo,
                "FFT frame length " + std::to_string(n) +
                    " is not a power of two (>= 2)");
  }

  ComplexSpectrum a(n);
  // Bit-reversal permutation of the real input.
  index_t bits = 0;
  while ((index_t{1} << bits) < n) ++bits;
  for (index_t i = 0; i < n; ++i) {
    index_t rev = 0;
    for (index_t b = 0; b < bits; ++b) rev |= ((i >> b) & 1) << (bits - 1 - b);
    a[rev] = std::complex<scalar_t>(frame[i], 0.0);
  }

  // Twiddles computed directly per index, not by repeated multiplication.
  std::vector<std::complex<scalar_t>> tw(static_cast<std::size_t>(n / 2));
  for (index_t k = 0; k < n / 2; ++k) {
    tw[static_cast<std::size_t>(k)] =
        std::polar(1.0, -kTwoPi * static_cast<double>(k) / static_cast<double>(n));
  }

  for (index_t len = 2; len <= n; len <<= 1) {
    const index_t half = len / 2;
    const index_t stride = n / len;
    for (index_t start = 0; start < n; start += len) {
      for (index_t k = 0; k < half; ++k) {
        const auto w = tw[static_cast<std::size_t>(k * stride)];
        const auto u = a[start + k];
        const auto v = a[start + k + half] * w;
        a[start + k] = u + v;
        a[start + k + half] = u - v;
      }
    }
  }
  return a;
}

vector_t make_window(Window window, index_t len) {
  vector_t w(len);
  if (window == Window::Rectangular) {
    w.setOnes();
  } else {
    for (index_t i = 0; i < len; ++i) {
      w[i] = 0.5 - 0.5 * std::cos(kTwoPi * static_cast<double>(i) /
                                  static_cast<double>(len));
    }
  }
  return w;
}

MagnitudeMatrix stft(const audio::AudioClip& clip, index_t block_len,
                     index_t hop, Window window) {
  const index_t n = clip.samples.size();
  if (hop < 1) {
    throw Error(ErrorCode::BadHop, "hop must be >= 1, got " + std::to_string(hop));
  }
  if (!is_power_of_two(block_len) || block_len < 2) {
    throw Error(ErrorCode::NotPowerOfTwo,
                "block length " + std::to_string(block_len) +
                    " is not a power of two");
  }
  if (n < block_len) {
    throw Error(ErrorCode::TooShort,
                "clip '" + clip.source_id + "' has " + std::to_string(n) +
                    " samples, need at least " + std::to_string(block_len));
  }

  const index_t cols = (n - block_len) / hop + 1;
  const index_t rows = block_len / 2 + 1;  // one-sided: bins 0..block_len/2
  const vector_t w = make_window(window, block_len);

  MagnitudeMatrix out;
  out.values.resize(rows, cols);
  out.frame_params = FrameParams{block_len, hop, window};

  vector_t frame(block_len);
  for (index_t t = 0; t < cols; ++t) {
    frame = clip.samples.segment(t * hop, block_len).cwiseProduct(w);
    const ComplexSpectrum spec = fft_radix2(frame);
    out.values.col(t) = spec.head(rows).cwiseAbs();
  }
  return out;
}

matrix_t to_decibels(const MagnitudeMatrix& mag, scalar_t floor_db) {
  return mag.values.unaryExpr([floor_db](scalar_t v) {
    return v > 0.0 ? std::max(10.0 * std::log10(v), floor_db) : floor_db;
  });
}

Spectrogram render_spectrogram(const matrix_t& db) {
  const index_t in_rows = db.rows();
  const index_t in_cols = db.cols();
  if (in_rows < 1 || in_cols < 1) {
    throw Error(ErrorCode::EmptyMatrix, "cannot render an empty dB matrix");
  }

  // Output cell (r, c) averages the source block with integer boundaries
  // floor(k*L/K)..floor((k+1)*L/K); blocks never go empty, so inputs
  // smaller than the target are replicated.
  const auto lo = [](index_t k, index_t in, index_t out) {
    return (k * in) / out;
  };
  Spectrogram s;
  for (index_t r = 0; r < kSpectroRows; ++r) {
    const index_t r0 = lo(r, in_rows, kSpectroRows);
    const index_t r1 = std::max(r0 + 1, lo(r + 1, in_rows, kSpectroRows));
    for (index_t c = 0; c < kSpectroCols; ++c) {
      const index_t c0 = lo(c, in_cols, kSpectroCols);
      const index_t c1 = std::max(c0 + 1, lo(c + 1, in_cols, kSpectroCols));
      s.pixels(r, c) = db.block(r0, c0, r1 - r0, c1 - c0).mean();
    }
  }

  const scalar_t mn = s.pixels.minCoeff();
  const scalar_t mx = s.pixels.maxCoeff();
  if (mx > mn) {
    s.pixels = (s.pixels.array() - mn) / (mx - mn);
  } else {
    s.pixels.setZero();
  }
  return s;
}

Spectrogram spectrogram_of(const audio::AudioClip& clip,
                           const SpectroParams& params) {
  const MagnitudeMatrix mag =
      stft(clip, params.block_len, params.hop, params.window);
  return render_spectrogram(to_decibels(mag, params.floor_db));
}

}  // namespace specaudit::dsp
