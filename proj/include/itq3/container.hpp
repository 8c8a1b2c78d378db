#pragma once

#include "itq3/codec.hpp"

#include <filesystem>
#include <iosfwd>

// Container layout, little-endian throughout:
//
//   magic    4 bytes  "ITQ3"
//   version  u16      1
//   flags    u16      bit 0: variant SS, bit 1: asymmetric zero-points
//   rows     u64
//   cols     u64
//   block_n  u32
//   pad      u32
//   blocks   ceil(rows*cols / block_n) serialized blocks, no padding between

namespace itq3::container {

inline constexpr char kMagic[4] = {'I', 'T', 'Q', '3'};
inline constexpr std::uint16_t kVersion = 1;
inline constexpr std::uint16_t kFlagSubScales = 1u << 0;
inline constexpr std::uint16_t kFlagAsymmetric = 1u << 1;
inline constexpr std::size_t kHeaderBytes = 4 + 2 + 2 + 8 + 8 + 4 + 4;

void write_container(const codec::QuantizedTensor &q, std::ostream &sink);
codec::QuantizedTensor read_container(std::istream &source);

void write_file(const codec::QuantizedTensor &q, const std::filesystem::path &path);
codec::QuantizedTensor read_file(const std::filesystem::path &path);

// Raw weights: rows*cols binary32 values, little-endian, row-major, no
// header. The file size must match the dims exactly.
codec::Matrix read_raw_f32(const std::filesystem::path &path, std::size_t rows,
                           std::size_t cols);
void write_raw_f32(const codec::Matrix &m, const std::filesystem::path &path);

} // namespace itq3::container
