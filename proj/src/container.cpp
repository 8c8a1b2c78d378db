#include "itq3/container.hpp"

#include "itq3/error.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <string>
#include <vector>

namespace itq3::container {

namespace {

template <typename T> void put_le(std::vector<std::uint8_t> &out, T v) {
  for (std::size_t i = 0; i < sizeof(T); ++i)
    out.push_back(static_cast<std::uint8_t>((static_cast<std::uint64_t>(v) >> (8 * i)) & 0xFF));
}

template <typename T> T get_le(const std::uint8_t *p) {
  std::uint64_t v = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i)
    v |= static_cast<std::uint64_t>(p[i]) << (8 * i);
  return static_cast<T>(v);
}

// Reads exactly buf.size() bytes or reports how far it got.
std::size_t read_some(std::istream &in, std::span<std::uint8_t> buf) {
  in.read(reinterpret_cast<char *>(buf.data()), static_cast<std::streamsize>(buf.size()));
  return static_cast<std::size_t>(in.gcount());
}

[[noreturn]] void truncated(std::uint64_t expected, std::uint64_t actual) {
  throw Error(ErrorKind::Truncated, "container truncated: expected " +
                                        std::to_string(expected) + " bytes, got " +
                                        std::to_string(actual));
}

} // namespace

void write_container(const codec::QuantizedTensor &q, std::ostream &sink) {
  codec::check_quantized(q);
  if (q.pad > std::numeric_limits<std::uint32_t>::max())
    throw Error(ErrorKind::SizeMismatch, "pad does not fit the header field");

  std::vector<std::uint8_t> bytes;
  bytes.reserve(kHeaderBytes + q.blocks.size() * pack::block_bytes(q.block_n, q.variant));
  bytes.insert(bytes.end(), std::begin(kMagic), std::end(kMagic));
  put_le<std::uint16_t>(bytes, kVersion);
  std::uint16_t flags = 0;
  if (q.variant == pack::Variant::SS)
    flags |= kFlagSubScales;
  if (q.asymmetric)
    flags |= kFlagAsymmetric;
  put_le<std::uint16_t>(bytes, flags);
  put_le<std::uint64_t>(bytes, q.rows);
  put_le<std::uint64_t>(bytes, q.cols);
  put_le<std::uint32_t>(bytes, static_cast<std::uint32_t>(q.block_n));
  put_le<std::uint32_t>(bytes, static_cast<std::uint32_t>(q.pad));
  for (const pack::PackedBlock &b : q.blocks)
    b.append_to(bytes);

  sink.write(reinterpret_cast<const char *>(bytes.data()),
             static_cast<std::streamsize>(bytes.size()));
  if (!sink)
    throw Error(ErrorKind::Io, "failed to write container");
}

codec::QuantizedTensor read_container(std::istream &source) {
  std::array<std::uint8_t, kHeaderBytes> header{};
  const std::size_t got = read_some(source, header);
  if (got >= 4 && !std::equal(std::begin(kMagic), std::end(kMagic), header.begin(),
                              [](char a, std::uint8_t b) { return static_cast<std::uint8_t>(a) == b; })) {
    throw Error(ErrorKind::BadMagic, "bad magic: not an ITQ3 container");
  }
  if (got < kHeaderBytes)
    truncated(kHeaderBytes, got);

  const std::uint16_t version = get_le<std::uint16_t>(&header[4]);
  if (version != kVersion)
    throw Error(ErrorKind::UnsupportedVersion,
                "unsupported container version " + std::to_string(version));
  const std::uint16_t flags = get_le<std::uint16_t>(&header[6]);
  if ((flags & ~(kFlagSubScales | kFlagAsymmetric)) != 0)
    throw Error(ErrorKind::UnsupportedVersion, "unknown container flags " + std::to_string(flags));

  codec::QuantizedTensor q;
  q.variant = (flags & kFlagSubScales) ? pack::Variant::SS : pack::Variant::S;
  q.asymmetric = (flags & kFlagAsymmetric) != 0;
  const auto rows = get_le<std::uint64_t>(&header[8]);
  const auto cols = get_le<std::uint64_t>(&header[16]);
  q.block_n = get_le<std::uint32_t>(&header[24]);
  q.pad = get_le<std::uint32_t>(&header[28]);

  if (rows == 0 || cols == 0 || rows > std::numeric_limits<std::uint64_t>::max() / cols)
    throw Error(ErrorKind::SizeMismatch, "container dimensions are invalid");
  if (!codec::is_valid_block_size(q.block_n))
    throw Error(ErrorKind::SizeMismatch, "container block size " + std::to_string(q.block_n) +
                                             " is not supported");
  q.rows = static_cast<std::size_t>(rows);
  q.cols = static_cast<std::size_t>(cols);

  const std::uint64_t total = rows * cols;
  const std::uint64_t count = (total + q.block_n - 1) / q.block_n;
  if (q.pad != count * q.block_n - total) {
    throw Error(ErrorKind::SizeMismatch, "header pad " + std::to_string(q.pad) +
                                             " disagrees with dims, expected " +
                                             std::to_string(count * q.block_n - total));
  }

  const std::size_t block_size = pack::block_bytes(q.block_n, q.variant);
  const std::uint64_t expected = kHeaderBytes + count * block_size;
  std::vector<std::uint8_t> buf(block_size);
  // Grow with the data actually read, not with the header's claim.
  for (std::uint64_t b = 0; b < count; ++b) {
    const std::size_t n = read_some(source, buf);
    if (n != block_size)
      truncated(expected, kHeaderBytes + b * block_size + n);
    try {
      q.blocks.push_back(pack::deserialize_block(buf, q.block_n, q.variant));
    } catch (const Error &e) {
      throw Error(e.kind(), "block " + std::to_string(b) + ": " + e.what());
    }
  }

  if (source.peek() != std::char_traits<char>::eof()) {
    throw Error(ErrorKind::SizeMismatch,
                "container has trailing bytes after " + std::to_string(expected) + " bytes");
  }
  return q;
}

void write_file(const codec::QuantizedTensor &q, const std::filesystem::path &path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out)
    throw Error(ErrorKind::Io, "cannot open " + path.string() + " for writing");
  write_container(q, out);
}

codec::QuantizedTensor read_file(const std::filesystem::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw Error(ErrorKind::Io, "cannot open " + path.string());
  return read_container(in);
}

codec::Matrix read_raw_f32(const std::filesystem::path &path, std::size_t rows,
                           std::size_t cols) {
  if (rows == 0 || cols == 0 || rows > std::numeric_limits<std::size_t>::max() / 4 / cols)
    throw Error(ErrorKind::Usage, "raw weight dimensions must be positive");
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw Error(ErrorKind::Io, "cannot open " + path.string());

  const std::size_t expected = rows * cols * 4;
  std::error_code ec;
  const auto size = std::filesystem::file_size(path, ec);
  if (ec)
    throw Error(ErrorKind::Io, "cannot stat " + path.string());
  if (size != expected) {
    throw Error(ErrorKind::SizeMismatch,
                path.string() + " holds " + std::to_string(size) + " bytes, expected " +
                    std::to_string(expected) + " for " + std::to_string(rows) + "x" +
                    std::to_string(cols) + " binary32");
  }
  std::vector<std::uint8_t> bytes(expected);
  if (read_some(in, bytes) != expected)
    throw Error(ErrorKind::Io, "short read from " + path.string());

  codec::Matrix m(rows, cols);
  for (std::size_t i = 0; i < m.values.size(); ++i)
    m.values[i] = std::bit_cast<float>(get_le<std::uint32_t>(&bytes[4 * i]));
  return m;
}

void write_raw_f32(const codec::Matrix &m, const std::filesystem::path &path) {
  std::vector<std::uint8_t> bytes;
  bytes.reserve(m.values.size() * 4);
  for (const float v : m.values)
    put_le<std::uint32_t>(bytes, std::bit_cast<std::uint32_t>(v));
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out)
    throw Error(ErrorKind::Io, "cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char *>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out)
    throw Error(ErrorKind::Io, "failed to write " + path.string());
}

} // namespace itq3::container
