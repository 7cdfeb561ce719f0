#include "prl/dataset_io.hpp"

#include <zlib.h>

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

#include "prl/error.hpp"

namespace prl {
namespace {

constexpr char kMagic[4] = {'P', 'R', 'L', 'B'};
constexpr std::size_t kHeaderSize = 4 + 4 + 8 + 8 + 4;

template <typename T>
void put_le(std::vector<std::uint8_t>& out, T value) {
  static_assert(std::is_integral_v<T>);
  using U = std::make_unsigned_t<T>;
  U v = static_cast<U>(value);
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    out.push_back(static_cast<std::uint8_t>(v & 0xFFu));
    v = static_cast<U>(v >> 8);
  }
}

template <typename T>
T get_le(const std::uint8_t* p) {
  T v = 0;
  for (std::size_t i = sizeof(T); i-- > 0;) v = static_cast<T>((v << 8) | p[i]);
  return v;
}

std::uint32_t crc_of(const std::uint8_t* data, std::size_t size) {
  uLong crc = crc32(0L, Z_NULL, 0);
  return static_cast<std::uint32_t>(crc32(crc, data, static_cast<uInt>(size)));
}

}  // namespace

std::vector<std::uint8_t> encode_dataset(const Dataset& data) {
  data.validate();
  std::vector<std::uint8_t> out;
  out.reserve(kHeaderSize + data.features.size() * 4 + data.labels.size() * 2 + 4);
  out.insert(out.end(), std::begin(kMagic), std::end(kMagic));
  put_le<std::uint32_t>(out, kDatasetFormatVersion);
  put_le<std::uint64_t>(out, data.n);
  put_le<std::uint64_t>(out, data.d);
  put_le<std::uint32_t>(out, data.k);
  for (float f : data.features) put_le<std::uint32_t>(out, std::bit_cast<std::uint32_t>(f));
  for (auto y : data.labels) put_le<std::uint16_t>(out, y);
  put_le<std::uint32_t>(out, crc_of(out.data(), out.size()));
  return out;
}

Dataset decode_dataset(const std::vector<std::uint8_t>& bytes) {
  if (bytes.size() < 4 || std::memcmp(bytes.data(), kMagic, 4) != 0) {
    throw DataError("dataset file: bad magic");
  }
  if (bytes.size() < kHeaderSize) throw DataError("dataset file: truncated header");
  const std::uint8_t* p = bytes.data();
  const auto version = get_le<std::uint32_t>(p + 4);
  if (version != kDatasetFormatVersion) {
    throw DataError("dataset file: unsupported version " + std::to_string(version));
  }
  Dataset data;
  data.n = get_le<std::uint64_t>(p + 8);
  data.d = get_le<std::uint64_t>(p + 16);
  data.k = get_le<std::uint32_t>(p + 24);

  const std::size_t body = bytes.size() - kHeaderSize;
  // Guard the size arithmetic against absurd headers before multiplying.
  if (data.d != 0 && data.n > body / 4 / data.d + 1) throw DataError("dataset file: truncated features");
  const std::size_t feature_bytes = data.n * data.d * 4;
  if (body < feature_bytes) throw DataError("dataset file: truncated features");
  if (body < feature_bytes + data.n * 2) throw DataError("dataset file: truncated labels");
  const std::size_t payload = kHeaderSize + feature_bytes + data.n * 2;
  if (bytes.size() < payload + 4) throw DataError("dataset file: truncated checksum");
  if (bytes.size() > payload + 4) throw DataError("dataset file: trailing bytes");
  if (get_le<std::uint32_t>(p + payload) != crc_of(p, payload)) {
    throw DataError("dataset file: checksum mismatch");
  }

  data.features.resize(data.n * data.d);
  const std::uint8_t* f = p + kHeaderSize;
  for (std::size_t i = 0; i < data.features.size(); ++i) {
    data.features[i] = std::bit_cast<float>(get_le<std::uint32_t>(f + 4 * i));
  }
  const std::uint8_t* l = f + feature_bytes;
  data.labels.resize(data.n);
  for (std::size_t i = 0; i < data.n; ++i) {
    data.labels[i] = get_le<std::uint16_t>(l + 2 * i);
    if (data.labels[i] >= data.k) throw DataError("dataset file: label >= k");
  }
  data.validate();
  return data;
}

void write_dataset(const Dataset& data, const std::filesystem::path& path) {
  const auto bytes = encode_dataset(data);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw DataError("write failed: " + path.string());
}

Dataset read_dataset(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  try {
    return decode_dataset(bytes);
  } catch (const DataError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

}  // namespace prl
