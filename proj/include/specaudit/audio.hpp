#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "specaudit/types.hpp"

namespace specaudit::audio {

/// Expected corpus sample rate; clips at any other rate are rejected.
inline constexpr int kRequiredRateHz = 16000;

/// Shortest clip usable for analysis: one full 512-sample block.
inline constexpr index_t kMinAnalysisSamples = 512;

/// Sampled mono waveform. Amplitudes are dimensionless, normalized to
/// [-1, 1] (16-bit integer divided by 32768).
struct AudioClip {
  vector_t samples;
  int sample_rate_hz = 0;
  std::string source_id;

  double duration_s() const {
    return static_cast<double>(samples.size()) / sample_rate_hz;
  }
};

/// Reads a RIFF/WAVE file. Only PCM 16-bit mono is accepted.
/// Throws MalformedContainer, UnsupportedEncoding, or EmptyAudio.
AudioClip load_wav(const std::filesystem::path& path);

/// Writes PCM 16-bit mono little-endian. Samples are rounded to the nearest
/// 16-bit step and clamped to [-32768, 32767]. Used by the toy generator
/// and by tests.
void save_wav(const AudioClip& clip, const std::filesystem::path& path);

/// Identity pass-through when the clip is at `required_rate_hz` and long
/// enough for one analysis block. Throws RateMismatch or TooShort;
/// no resampling is ever performed.
const AudioClip& validate_clip(const AudioClip& clip, int required_rate_hz);

enum class ToyKind { Harmonic, ModulatedNoise };

/// Deterministic synthetic clip at 16 kHz, a stand-in corpus for
/// desk-scale runs. Harmonic: three sinusoids at a seeded fundamental in
/// [100, 300] Hz plus its 2nd and 3rd harmonics, amplitudes 0.5/0.25/0.125.
/// Modulated noise: seeded white noise amplitude-modulated at a seeded rate
/// in [2, 8] Hz with peak 0.8. Pure function of (kind, duration_s, seed).
AudioClip synthesize_toy_clip(ToyKind kind, double duration_s,
                              std::uint64_t seed);

}  // namespace specaudit::audio
