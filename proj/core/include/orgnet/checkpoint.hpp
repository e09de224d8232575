#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "orgnet/organism.hpp"

namespace orgnet {

/// Binary organism checkpoint, version 1.
///
///   bytes 0..7   magic "ORGNETCK"
///   u32          format version
///   u8           endianness tag ('L'; every multi-byte value is little-endian)
///   payload      organism architecture, particle architecture, every particle's
///                weights and self-training optimizer, the task optimizer
///   u64          FNV-1a hash of the payload
inline constexpr std::uint32_t kCheckpointVersion = 1;

void save_checkpoint(const OrganismNetwork& on, const std::filesystem::path& path);

/// Throws FormatError on a bad magic, version, endianness tag, hash or size.
OrganismNetwork load_checkpoint(const std::filesystem::path& path);

std::string encode_checkpoint(const OrganismNetwork& on);
OrganismNetwork decode_checkpoint(const std::string& bytes);

}  // namespace orgnet
