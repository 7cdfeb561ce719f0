#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "prl/dataset.hpp"

namespace prl {

/// Binary dataset file, all integers little-endian, no padding:
///
///   "PRLB" | u32 version=1 | u64 n | u64 d | u32 k
///   | n*d f32 features (row-major) | n u16 labels | u32 CRC32
///
/// The CRC covers every preceding byte.
inline constexpr std::uint32_t kDatasetFormatVersion = 1;

std::vector<std::uint8_t> encode_dataset(const Dataset& data);
Dataset decode_dataset(const std::vector<std::uint8_t>& bytes);

void write_dataset(const Dataset& data, const std::filesystem::path& path);
Dataset read_dataset(const std::filesystem::path& path);

}  // namespace prl
