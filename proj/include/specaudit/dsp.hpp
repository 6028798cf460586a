#pragma once

#include "specaudit/audio.hpp"
#include "specaudit/types.hpp"

namespace specaudit::dsp {

/// DFT coefficients F(m), m = 0..N-1, same length as the input frame.
/// For real input the spectrum is conjugate-symmetric: F(N-m) = conj(F(m)).
using ComplexSpectrum = cvector_t;

enum class Window { Hann, Rectangular };

const char* window_name(Window w);

struct FrameParams {
  index_t block_len = 512;
  index_t hop = 1;
  Window window = Window::Hann;
};

/// One-sided STFT magnitudes |F(m)|. Rows are frequency bins
/// 0..block_len/2 (low first), columns are time frames.
struct MagnitudeMatrix {
  matrix_t values;
  FrameParams frame_params;
};

inline constexpr index_t kSpectroRows = 50;  // frequency, low at row 0
inline constexpr index_t kSpectroCols = 34;  // time, increasing left to right
inline constexpr scalar_t kDefaultFloorDb = -100.0;

/// Normalized grayscale spectrogram, the network input. Row 0 holds the
/// lowest frequency band; every pixel lies in [0, 1] with min 0 and max 1
/// unless the source was constant.
struct Spectrogram {
  Eigen::Matrix<scalar_t, kSpectroRows, kSpectroCols> pixels;
};

/// Bundle of every knob that changes spectrogram pixels; also the
/// disk-cache key.
struct SpectroParams {
  index_t block_len = 512;
  index_t hop = 1;
  Window window = Window::Hann;
  scalar_t floor_db = kDefaultFloorDb;
};

/// Direct O(N^2) evaluation of F(m) = sum_n f[n] exp(-i 2 pi m n / N).
/// The reference against which the fast path is checked.
ComplexSpectrum dft_naive(Eigen::Ref<const vector_t> frame);

/// Iterative radix-2 FFT; requires a power-of-two frame length.
ComplexSpectrum fft_radix2(Eigen::Ref<const vector_t> frame);

/// Analysis window of length `len`; Hann is the periodic variant
/// 0.5 - 0.5 cos(2 pi n / len).
vector_t make_window(Window window, index_t len);

/// Sliding-block magnitude spectra. Column t covers samples
/// [t*hop, t*hop + block_len); column count is
/// floor((N - block_len)/hop) + 1.
MagnitudeMatrix stft(const audio::AudioClip& clip, index_t block_len = 512,
                     index_t hop = 1, Window window = Window::Hann);

/// Elementwise max(10*log10(v), floor_db); zero magnitudes map to the
/// floor exactly, so no -inf ever escapes.
matrix_t to_decibels(const MagnitudeMatrix& mag,
                     scalar_t floor_db = kDefaultFloorDb);

/// Box-filter (area-average) downsampling of a dB grid onto the fixed
/// 50x34 geometry, then per-image min-max normalization to [0, 1].
/// A constant input renders as all zeros.
Spectrogram render_spectrogram(const matrix_t& db);

/// Full clip-to-image path with one set of parameters.
Spectrogram spectrogram_of(const audio::AudioClip& clip,
                           const SpectroParams& params = {});

}  // namespace specaudit::dsp
