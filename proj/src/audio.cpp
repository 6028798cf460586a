#include "specaudit/audio.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <numbers>
#include <vector>

#include "specaudit/error.hpp"
#include "specaudit/rng.hpp"

namespace specaudit::audio {
namespace {

std::vector<std::uint8_t> read_all_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(ErrorCode::MalformedContainer,
                "cannot open '" + path.string() + "'");
  }
  return std::vector<std::uint8_t>(std::istreambuf_iterator<char>(in),
                                   std::istreambuf_iterator<char>());
}

std::uint16_t read_u16le(const std::uint8_t* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

std::uint32_t read_u32le(const std::uint8_t* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) |
         (static_cast<std::uint32_t>(p[3]) << 24);
}

void put_u16le(std::uint16_t v, std::string& out) {
  out.push_back(static_cast<char>(v & 0xff));
  out.push_back(static_cast<char>((v >> 8) & 0xff));
}

void put_u32le(std::uint32_t v, std::string& out) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

constexpr std::uint16_t kFormatPcm = 1;

}  // namespace

AudioClip load_wav(const std::filesystem::path& path) {
  const auto bytes = read_all_bytes(path);
  const std::string where = "'" + path.string() + "'";

  if (bytes.size() < 12 || std::memcmp(bytes.data(), "RIFF", 4) != 0 ||
      std::memcmp(bytes.data() + 8, "WAVE", 4) != 0) {
    throw Error(ErrorCode::MalformedContainer,
                where + " is not a RIFF/WAVE file");
  }

  bool have_fmt = false;
  std::uint16_t format_tag = 0, channels = 0, bits = 0;
  std::uint32_t rate = 0;
  bool have_data = false;
  std::size_t data_off = 0, data_len = 0;

  std::size_t off = 12;
  while (off + 8 <= bytes.size()) {
    const std::uint8_t* hdr = bytes.data() + off;
    const std::uint32_t chunk_len = read_u32le(hdr + 4);
    if (off + 8 + chunk_len > bytes.size()) {
      throw Error(ErrorCode::MalformedContainer,
                  where + ": chunk overruns end of file");
    }
    if (std::memcmp(hdr, "fmt ", 4) == 0) {
      if (chunk_len < 16) {
        throw Error(ErrorCode::MalformedContainer, where + ": fmt chunk too small");
      }
      const std::uint8_t* f = hdr + 8;
      format_tag = read_u16le(f);
      channels = read_u16le(f + 2);
      rate = read_u32le(f + 4);
      bits = read_u16le(f + 14);
      have_fmt = true;
    } else if (std::memcmp(hdr, "data", 4) == 0) {
      data_off = off + 8;
      data_len = chunk_len;
      have_data = true;
    }
    off += 8 + chunk_len + (chunk_len & 1);  // chunks are word-aligned
  }

  if (!have_fmt || !have_data) {
    throw Error(ErrorCode::MalformedContainer,
                where + ": missing fmt or data chunk");
  }
  if (format_tag != kFormatPcm || bits != 16 || channels != 1) {
    throw Error(ErrorCode::UnsupportedEncoding,
                where + ": only PCM 16-bit mono is supported (format=" +
                    std::to_string(format_tag) + ", bits=" + std::to_string(bits) +
                    ", channels=" + std::to_string(channels) + ")");
  }
  if (data_len == 0) {
    throw Error(ErrorCode::EmptyAudio, where + ": data chunk is empty");
  }
  if (rate == 0) {
    throw Error(ErrorCode::MalformedContainer, where + ": sample rate is zero");
  }
  if (data_len % 2 != 0) {
    throw Error(ErrorCode::MalformedContainer,
                where + ": odd data size for 16-bit samples");
  }

  const index_t n = static_cast<index_t>(data_len / 2);
  AudioClip clip;
  clip.samples.resize(n);
  const std::uint8_t* d = bytes.data() + data_off;
  for (index_t i = 0; i < n; ++i) {
    const auto raw = static_cast<std::int16_t>(read_u16le(d + 2 * i));
    clip.samples[i] = static_cast<scalar_t>(raw) / 32768.0;
  }
  clip.sample_rate_hz = static_cast<int>(rate);
  clip.source_id = path.stem().string();
  return clip;
}

void save_wav(const AudioClip& clip, const std::filesystem::path& path) {
  const index_t n = clip.samples.size();
  const std::uint32_t data_len = static_cast<std::uint32_t>(n * 2);

  std::string out;
  out.reserve(44 + data_len);
  out.append("RIFF");
  put_u32le(36 + data_len, out);
  out.append("WAVE");
  out.append("fmt ");
  put_u32le(16, out);
  put_u16le(kFormatPcm, out);
  put_u16le(1, out);  // mono
  put_u32le(static_cast<std::uint32_t>(clip.sample_rate_hz), out);
  put_u32le(static_cast<std::uint32_t>(clip.sample_rate_hz) * 2, out);
  put_u16le(2, out);   // block align
  put_u16le(16, out);  // bits per sample
  out.append("data");
  put_u32le(data_len, out);
  for (index_t i = 0; i < n; ++i) {
    long v = std::lround(clip.samples[i] * 32768.0);
    if (v < -32768) v = -32768;
    if (v > 32767) v = 32767;
    put_u16le(static_cast<std::uint16_t>(static_cast<std::int16_t>(v)), out);
  }

  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) {
    throw Error(ErrorCode::MalformedContainer,
                "cannot write '" + path.string() + "'");
  }
  f.write(out.data(), static_cast<std::streamsize>(out.size()));
}

const AudioClip& validate_clip(const AudioClip& clip, int required_rate_hz) {
  if (clip.sample_rate_hz != required_rate_hz) {
    throw Error(ErrorCode::RateMismatch,
                "clip '" + clip.source_id + "' is at " +
                    std::to_string(clip.sample_rate_hz) + " Hz, required " +
                    std::to_string(required_rate_hz) + " Hz");
  }
  if (clip.samples.size() < kMinAnalysisSamples) {
    throw Error(ErrorCode::TooShort,
                "clip '" + clip.source_id + "' has " +
                    std::to_string(clip.samples.size()) +
                    " samples, need at least " +
                    std::to_string(kMinAnalysisSamples));
  }
  return clip;
}

AudioClip synthesize_toy_clip(ToyKind kind, double duration_s,
                              std::uint64_t seed) {
  if (!(duration_s >= 0.1)) {
    throw Error(ErrorCode::DurationTooShort,
                "toy clip duration must be at least 0.1 s");
  }
  const index_t n = static_cast<index_t>(std::llround(duration_s * kRequiredRateHz));

  SeededRng rng(seed);
  AudioClip clip;
  clip.samples.resize(n);
  clip.sample_rate_hz = kRequiredRateHz;

  constexpr double two_pi = 2.0 * std::numbers::pi;
  if (kind == ToyKind::Harmonic) {
    const double f0 = rng.uniform(100.0, 300.0);
    for (index_t i = 0; i < n; ++i) {
      const double t = static_cast<double>(i) / kRequiredRateHz;
      clip.samples[i] = 0.5 * std::sin(two_pi * f0 * t) +
                        0.25 * std::sin(two_pi * 2.0 * f0 * t) +
                        0.125 * std::sin(two_pi * 3.0 * f0 * t);
    }
    clip.source_id = "toy-harmonic-" + std::to_string(seed);
  } else {
    const double mod_hz = rng.uniform(2.0, 8.0);
    for (index_t i = 0; i < n; ++i) {
      const double t = static_cast<double>(i) / kRequiredRateHz;
      const double envelope = 0.5 + 0.5 * std::sin(two_pi * mod_hz * t);
      clip.samples[i] = 0.8 * envelope * rng.uniform(-1.0, 1.0);
    }
    clip.source_id = "toy-noise-" + std::to_string(seed);
  }
  return clip;
}

}  // namespace specaudit::audio
