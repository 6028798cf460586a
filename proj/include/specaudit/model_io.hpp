#pragma once

#include <cstdint>
#include <filesystem>

#include "specaudit/net.hpp"

namespace specaudit::nn {

inline constexpr char kModelMagic[] = "SPECAUDIT";  // 9 bytes, no terminator
inline constexpr std::uint16_t kModelFormatVersion = 1;

/// Versioned binary model file: magic, u16 format version, then a
/// CRC32-terminated payload holding the architecture tag, the geometry,
/// and every parameter tensor as little-endian 64-bit floats in declared
/// order.
void save_model(const ModelParams& model, const std::filesystem::path& path);

/// Inverse of save_model; load(save(m)) is bit-exact.
/// Throws BadMagic, VersionMismatch, ChecksumFailure, or TruncatedFile.
ModelParams load_model(const std::filesystem::path& path);

/// CRC-32 (IEEE 802.3, reflected), the checksum used by the model format.
std::uint32_t crc32(const std::uint8_t* data, std::size_t len);

}  // namespace specaudit::nn
