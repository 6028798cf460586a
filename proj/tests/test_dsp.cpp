#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "specaudit/dsp.hpp"
#include "specaudit/error.hpp"
#include "specaudit/rng.hpp"

using namespace specaudit;
using namespace specaudit::dsp;

namespace {

constexpr double kPi = std::numbers::pi;

vector_t random_frame(index_t n, std::uint64_t seed) {
  vector_t f(n);
  SeededRng rng(seed);
  for (index_t i = 0; i < n; ++i) f[i] = rng.uniform(-1.0, 1.0);
  return f;
}

double max_rel_error(const ComplexSpectrum& got, const ComplexSpectrum& want) {
  double worst = 0.0, scale = 0.0;
  for (index_t i = 0; i < want.size(); ++i) {
    scale = std::max(scale, std::abs(want[i]));
  }
  if (scale == 0.0) scale = 1.0;
  for (index_t i = 0; i < got.size(); ++i) {
    worst = std::max(worst, std::abs(got[i] - want[i]) / scale);
  }
  return worst;
}

audio::AudioClip clip_of(vector_t samples) {
  audio::AudioClip clip;
  clip.samples = std::move(samples);
  clip.sample_rate_hz = audio::kRequiredRateHz;
  clip.source_id = "fixture";
  return clip;
}

}  // namespace

TEST_CASE("dft of a constant concentrates everything in bin zero") {
  vector_t frame = vector_t::Constant(8, 1.0);
  const ComplexSpectrum f = dft_naive(frame);
  REQUIRE(f.size() == 8);
  CHECK(std::abs(f[0] - std::complex<scalar_t>(8.0, 0.0)) < 1e-12);
  for (index_t m = 1; m < 8; ++m) CHECK(std::abs(f[m]) < 1e-12);
}

TEST_CASE("dft of a unit cosine puts N/2 in the matching bins") {
  const index_t n = 8;
  vector_t frame(n);
  for (index_t i = 0; i < n; ++i) {
    frame[i] = std::cos(2.0 * kPi * static_cast<double>(i) / n);
  }
  const ComplexSpectrum f = dft_naive(frame);
  CHECK(std::abs(f[1] - std::complex<scalar_t>(4.0, 0.0)) < 1e-12);
  CHECK(std::abs(f[7] - std::complex<scalar_t>(4.0, 0.0)) < 1e-12);
  for (index_t m : {0, 2, 3, 4, 5, 6}) CHECK(std::abs(f[m]) < 1e-12);
}

TEST_CASE("fft matches the naive dft over 100 random 512-sample frames") {
  double worst = 0.0;
  for (int t = 0; t < 100; ++t) {
    const vector_t frame = random_frame(512, 1000 + static_cast<std::uint64_t>(t));
    worst = std::max(worst, max_rel_error(fft_radix2(frame), dft_naive(frame)));
  }
  CHECK(worst <= 1e-9);
}

TEST_CASE("fft matches the naive dft at every power of two up to 1024") {
  for (index_t n = 2; n <= 1024; n *= 2) {
    const vector_t frame = random_frame(n, 7 + static_cast<std::uint64_t>(n));
    CHECK(max_rel_error(fft_radix2(frame), dft_naive(frame)) <= 1e-9);
  }
}

TEST_CASE("fft satisfies parseval and conjugate symmetry") {
  const vector_t frame = random_frame(512, 99);
  const ComplexSpectrum f = fft_radix2(frame);

  const double time_energy = frame.squaredNorm();
  double freq_energy = 0.0;
  for (index_t m = 0; m < f.size(); ++m) freq_energy += std::norm(f[m]);
  freq_energy /= static_cast<double>(frame.size());
  CHECK(std::abs(time_energy - freq_energy) / time_energy <= 1e-12);

  for (index_t m = 1; m < f.size(); ++m) {
    CHECK(std::abs(f[m] - std::conj(f[f.size() - m])) <= 1e-9);
  }
  CHECK(std::abs(f[0].imag()) <= 1e-12);
}

TEST_CASE("fft rejects frames whose length is not a power of two") {
  CHECK_THROWS_WITH_AS(fft_radix2(random_frame(3, 1)),
                       doctest::Contains("NotPowerOfTwo"), Error);
  CHECK_THROWS_WITH_AS(fft_radix2(random_frame(500, 1)),
                       doctest::Contains("NotPowerOfTwo"), Error);
  // Length one is a power of two arithmetically but below the radix-2
  // minimum of two samples.
  CHECK_THROWS_WITH_AS(fft_radix2(random_frame(1, 1)),
                       doctest::Contains("NotPowerOfTwo"), Error);
  CHECK_THROWS_WITH_AS(fft_radix2(vector_t()),
                       doctest::Contains("NotPowerOfTwo"), Error);
  CHECK_THROWS_WITH_AS(dft_naive(vector_t()), doctest::Contains("EmptyFrame"),
                       Error);
}

TEST_CASE("make_window produces the periodic hann and the all-ones rectangle") {
  const index_t n = 16;
  const vector_t hann = make_window(Window::Hann, n);
  REQUIRE(hann.size() == n);
  CHECK(hann[0] == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(hann[n / 2] == doctest::Approx(1.0).epsilon(1e-15));
  for (index_t i = 0; i < n; ++i) {
    const double want =
        0.5 - 0.5 * std::cos(2.0 * kPi * static_cast<double>(i) / n);
    CHECK(hann[i] == doctest::Approx(want).epsilon(1e-14));
    if (i >= 1) {
      // periodic variant: w[i] == w[n - i] (index n wraps to 0's value of
      // the NEXT period, so symmetry is about n/2 over 1..n-1)
      CHECK(hann[i] == doctest::Approx(hann[n - i]).epsilon(1e-12));
    }
  }

  const vector_t rect = make_window(Window::Rectangular, 9);
  CHECK(rect.size() == 9);
  CHECK(rect.minCoeff() == 1.0);
  CHECK(rect.maxCoeff() == 1.0);
}

TEST_CASE("stft produces one column per hop-aligned block") {
  const auto clip = clip_of(random_frame(1000, 5));

  const MagnitudeMatrix m1 = stft(clip, 512, 1, Window::Hann);
  CHECK(m1.values.rows() == 257);
  CHECK(m1.values.cols() == (1000 - 512) / 1 + 1);

  const MagnitudeMatrix m2 = stft(clip, 512, 100, Window::Hann);
  CHECK(m2.values.cols() == (1000 - 512) / 100 + 1);

  const MagnitudeMatrix m3 = stft(clip, 256, 256, Window::Rectangular);
  CHECK(m3.values.rows() == 129);
  CHECK(m3.values.cols() == 3);  // samples 0..255, 256..511, 512..767

  CHECK((m1.values.array() >= 0.0).all());
}

TEST_CASE("stft rejects short clips and bad hops") {
  const auto clip = clip_of(random_frame(400, 6));
  CHECK_THROWS_WITH_AS(stft(clip, 512, 1, Window::Hann),
                       doctest::Contains("TooShort"), Error);
  const auto ok = clip_of(random_frame(600, 6));
  CHECK_THROWS_WITH_AS(stft(ok, 512, 0, Window::Hann),
                       doctest::Contains("BadHop"), Error);
  CHECK_THROWS_WITH_AS(stft(ok, 500, 1, Window::Hann),
                       doctest::Contains("NotPowerOfTwo"), Error);
}

TEST_CASE("a bin-aligned sine under a rectangular window lands at N/2 times A") {
  const index_t n = 512;
  const double amp = 0.25;
  const index_t bin = 20;
  vector_t samples(n);
  for (index_t i = 0; i < n; ++i) {
    samples[i] =
        amp * std::sin(2.0 * kPi * static_cast<double>(bin * i) / n);
  }
  const MagnitudeMatrix m = stft(clip_of(samples), n, n, Window::Rectangular);
  REQUIRE(m.values.cols() == 1);
  CHECK(m.values(bin, 0) == doctest::Approx(amp * n / 2.0).epsilon(1e-9));

  // Everything else is numerically zero.
  for (index_t r = 0; r < m.values.rows(); ++r) {
    if (r != bin) CHECK(m.values(r, 0) < 1e-8);
  }
}

TEST_CASE("to_decibels applies 10 log10 with an exact floor") {
  MagnitudeMatrix mag;
  mag.values = matrix_t(2, 2);
  mag.values << 1.0, 10.0, 0.0, 1e-30;
  const matrix_t db = to_decibels(mag);
  CHECK(db(0, 0) == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(db(0, 1) == doctest::Approx(10.0).epsilon(1e-15));
  CHECK(db(1, 0) == -100.0);
  CHECK(db(1, 1) == -100.0);  // 10*log10(1e-30) = -300, clamped

  const matrix_t warm = to_decibels(mag, -20.0);
  CHECK(warm(1, 0) == -20.0);
}

TEST_CASE("render_spectrogram equals a brute-force box average") {
  SeededRng rng(10);
  matrix_t db(257, 89);
  for (index_t r = 0; r < db.rows(); ++r) {
    for (index_t c = 0; c < db.cols(); ++c) db(r, c) = rng.uniform(-100.0, 0.0);
  }

  const Spectrogram got = render_spectrogram(db);

  // Independent re-derivation: integer block edges lo(k) = floor(k*in/out),
  // each output cell is the mean of its block, then min-max normalize.
  matrix_t mean(kSpectroRows, kSpectroCols);
  const auto lo = [](index_t k, index_t in, index_t out) {
    return (k * in) / out;
  };
  for (index_t r = 0; r < kSpectroRows; ++r) {
    const index_t r0 = lo(r, db.rows(), kSpectroRows);
    const index_t r1 = std::max(r0 + 1, lo(r + 1, db.rows(), kSpectroRows));
    for (index_t c = 0; c < kSpectroCols; ++c) {
      const index_t c0 = lo(c, db.cols(), kSpectroCols);
      const index_t c1 = std::max(c0 + 1, lo(c + 1, db.cols(), kSpectroCols));
      mean(r, c) = db.block(r0, c0, r1 - r0, c1 - c0).mean();
    }
  }
  const double mn = mean.minCoeff(), mx = mean.maxCoeff();
  for (index_t r = 0; r < kSpectroRows; ++r) {
    for (index_t c = 0; c < kSpectroCols; ++c) {
      const double want = (mean(r, c) - mn) / (mx - mn);
      CHECK(got.pixels(r, c) == doctest::Approx(want).epsilon(1e-12));
    }
  }

  CHECK(got.pixels.minCoeff() == 0.0);
  CHECK(got.pixels.maxCoeff() == 1.0);
}

TEST_CASE("render_spectrogram upsamples small grids by replication") {
  matrix_t db(2, 2);
  db << 0.0, -10.0, -20.0, -30.0;
  const Spectrogram s = render_spectrogram(db);
  // Top-left quadrant of the output comes entirely from db(0,0) etc.
  CHECK(s.pixels(0, 0) == 1.0);
  CHECK(s.pixels(0, kSpectroCols - 1) == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
  CHECK(s.pixels(kSpectroRows - 1, 0) == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
  CHECK(s.pixels(kSpectroRows - 1, kSpectroCols - 1) == 0.0);
}

TEST_CASE("render_spectrogram maps constant inputs to all zeros") {
  const Spectrogram s = render_spectrogram(matrix_t::Constant(60, 40, -37.5));
  CHECK(s.pixels.maxCoeff() == 0.0);
  CHECK(s.pixels.minCoeff() == 0.0);
  CHECK_THROWS_WITH_AS(render_spectrogram(matrix_t()),
                       doctest::Contains("EmptyMatrix"), Error);
}

TEST_CASE("spectrogram_of is shape-correct, bounded, and deterministic") {
  const auto clip =
      clip_of(0.5 * random_frame(1600, 77).array().sin().matrix());
  SpectroParams params;
  params.hop = 32;

  const Spectrogram a = spectrogram_of(clip, params);
  const Spectrogram b = spectrogram_of(clip, params);
  CHECK(a.pixels.rows() == 50);
  CHECK(a.pixels.cols() == 34);
  CHECK(a.pixels.minCoeff() == 0.0);
  CHECK(a.pixels.maxCoeff() == 1.0);
  CHECK((a.pixels - b.pixels).cwiseAbs().maxCoeff() == 0.0);

  SpectroParams rect = params;
  rect.window = Window::Rectangular;
  const Spectrogram c = spectrogram_of(clip, rect);
  CHECK((a.pixels - c.pixels).cwiseAbs().maxCoeff() > 0.0);
}

TEST_CASE("window_name strings are stable") {
  CHECK(std::string(window_name(Window::Hann)) == "hann");
  CHECK(std::string(window_name(Window::Rectangular)) == "rect");
}
