#include "specaudit/model_io.hpp"

#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <vector>

#include "specaudit/error.hpp"

namespace specaudit::nn {
namespace {

constexpr std::size_t kMagicLen = 9;

std::array<std::uint32_t, 256> make_crc_table() {
  std::array<std::uint32_t, 256> table{};
  for (std::uint32_t i = 0; i < 256; ++i) {
    std::uint32_t c = i;
    for (int b = 0; b < 8; ++b) {
      c = (c & 1) ? 0xEDB88320u ^ (c >> 1) : (c >> 1);
    }
    table[i] = c;
  }
  return table;
}

class Writer {
 public:
  void u16(std::uint16_t v) {
    for (int i = 0; i < 2; ++i) bytes_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) bytes_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void i64(std::int64_t v) {
    const auto u = static_cast<std::uint64_t>(v);
    for (int i = 0; i < 8; ++i) bytes_.push_back(static_cast<std::uint8_t>(u >> (8 * i)));
  }
  void f64(double v) {
    std::uint64_t u;
    std::memcpy(&u, &v, sizeof(u));
    for (int i = 0; i < 8; ++i) bytes_.push_back(static_cast<std::uint8_t>(u >> (8 * i)));
  }
  void str(const std::string& s) {
    u16(static_cast<std::uint16_t>(s.size()));
    bytes_.insert(bytes_.end(), s.begin(), s.end());
  }
  const std::vector<std::uint8_t>& bytes() const { return bytes_; }

 private:
  std::vector<std::uint8_t> bytes_;
};

class Reader {
 public:
  Reader(const std::uint8_t* data, std::size_t len) : data_(data), len_(len) {}

  std::uint16_t u16() {
    need(2);
    std::uint16_t v = static_cast<std::uint16_t>(data_[pos_] | (data_[pos_ + 1] << 8));
    pos_ += 2;
    return v;
  }
  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(data_[pos_ + i]) << (8 * i);
    pos_ += 4;
    return v;
  }
  std::int64_t i64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(data_[pos_ + i]) << (8 * i);
    pos_ += 8;
    return static_cast<std::int64_t>(v);
  }
  double f64() {
    need(8);
    std::uint64_t u = 0;
    for (int i = 0; i < 8; ++i) u |= static_cast<std::uint64_t>(data_[pos_ + i]) << (8 * i);
    pos_ += 8;
    double v;
    std::memcpy(&v, &u, sizeof(v));
    return v;
  }
  std::string str() {
    const std::uint16_t n = u16();
    need(n);
    std::string s(reinterpret_cast<const char*>(data_ + pos_), n);
    pos_ += n;
    return s;
  }
  std::size_t pos() const { return pos_; }
  std::size_t remaining() const { return len_ - pos_; }

 private:
  void need(std::size_t n) {
    if (pos_ + n > len_) {
      throw Error(ErrorCode::TruncatedFile, "model file ends mid-record");
    }
  }
  const std::uint8_t* data_;
  std::size_t len_;
  std::size_t pos_ = 0;
};

}  // namespace

std::uint32_t crc32(const std::uint8_t* data, std::size_t len) {
  static const auto table = make_crc_table();
  std::uint32_t c = 0xFFFFFFFFu;
  for (std::size_t i = 0; i < len; ++i) {
    c = table[(c ^ data[i]) & 0xFF] ^ (c >> 8);
  }
  return c ^ 0xFFFFFFFFu;
}

void save_model(const ModelParams& model, const std::filesystem::path& path) {
  Writer payload;
  payload.str(model.arch_version());
  const Arch& a = model.arch;
  payload.i64(a.input_rows);
  payload.i64(a.input_cols);
  payload.i64(a.conv1_filters);
  payload.i64(a.conv2_filters);
  payload.i64(a.dense1_units);
  payload.f64(a.dropout1_rate);
  payload.f64(a.dropout2_rate);
  model.params.for_each([&payload](const Tensor& t) {
    for (index_t i = 0; i < t.size(); ++i) payload.f64(t[i]);
  });

  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) {
    throw Error(ErrorCode::MalformedContainer,
                "cannot write '" + path.string() + "'");
  }
  f.write(kModelMagic, kMagicLen);
  const std::uint16_t version = kModelFormatVersion;
  const std::uint8_t vbytes[2] = {static_cast<std::uint8_t>(version & 0xFF),
                                  static_cast<std::uint8_t>(version >> 8)};
  f.write(reinterpret_cast<const char*>(vbytes), 2);
  const auto& body = payload.bytes();
  f.write(reinterpret_cast<const char*>(body.data()),
          static_cast<std::streamsize>(body.size()));
  const std::uint32_t crc = crc32(body.data(), body.size());
  std::uint8_t cbytes[4];
  for (int i = 0; i < 4; ++i) cbytes[i] = static_cast<std::uint8_t>(crc >> (8 * i));
  f.write(reinterpret_cast<const char*>(cbytes), 4);
}

ModelParams load_model(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) {
    throw Error(ErrorCode::MalformedContainer,
                "cannot open '" + path.string() + "'");
  }
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(f)),
                                  std::istreambuf_iterator<char>());

  if (bytes.size() < kMagicLen ||
      std::memcmp(bytes.data(), kModelMagic, kMagicLen) != 0) {
    throw Error(ErrorCode::BadMagic,
                "'" + path.string() + "' is not a model file");
  }
  if (bytes.size() < kMagicLen + 2) {
    throw Error(ErrorCode::TruncatedFile, "model file ends before the version");
  }
  const std::uint16_t version = static_cast<std::uint16_t>(
      bytes[kMagicLen] | (bytes[kMagicLen + 1] << 8));
  if (version != kModelFormatVersion) {
    throw Error(ErrorCode::VersionMismatch,
                "model format version " + std::to_string(version) +
                    ", expected " + std::to_string(kModelFormatVersion));
  }
  const std::uint8_t* body = bytes.data() + kMagicLen + 2;
  const std::size_t avail = bytes.size() - kMagicLen - 2;

  // The geometry header pins the exact payload length, so truncation is
  // detectable before the checksum is even looked at.
  Reader header(body, avail);
  const std::string tag = header.str();
  Arch arch;
  arch.input_rows = header.i64();
  arch.input_cols = header.i64();
  arch.conv1_filters = header.i64();
  arch.conv2_filters = header.i64();
  arch.dense1_units = header.i64();
  arch.dropout1_rate = header.f64();
  arch.dropout2_rate = header.f64();
  if (arch.input_rows < 5 || arch.input_cols < 5 || arch.conv1_filters < 1 ||
      arch.conv2_filters < 1 || arch.dense1_units < 1 ||
      arch.conv2_rows() < 2 || arch.conv2_cols() < 2) {
    throw Error(ErrorCode::ChecksumFailure, "model geometry is implausible");
  }
  if (tag != arch.tag()) {
    throw Error(ErrorCode::VersionMismatch,
                "architecture tag '" + tag + "' does not match the geometry");
  }

  ModelParams model;
  model.arch = arch;
  model.params = ParamBlock::zeros(arch);

  const std::size_t body_len =
      header.pos() +
      static_cast<std::size_t>(model.params.total_size()) * sizeof(double);
  if (avail < body_len + 4) {
    throw Error(ErrorCode::TruncatedFile,
                "model file holds " + std::to_string(avail) +
                    " payload bytes, expected " + std::to_string(body_len + 4));
  }
  if (avail > body_len + 4) {
    throw Error(ErrorCode::ChecksumFailure,
                "model file has " + std::to_string(avail - body_len - 4) +
                    " unexpected trailing bytes");
  }
  const std::uint8_t* cptr = body + body_len;
  std::uint32_t stored = 0;
  for (int i = 0; i < 4; ++i) stored |= static_cast<std::uint32_t>(cptr[i]) << (8 * i);
  if (crc32(body, body_len) != stored) {
    throw Error(ErrorCode::ChecksumFailure, "model payload checksum mismatch");
  }

  Reader r(body + header.pos(), body_len - header.pos());
  model.params.for_each([&r](Tensor& t) {
    for (index_t i = 0; i < t.size(); ++i) t[i] = r.f64();
  });
  return model;
}

}  // namespace specaudit::nn
