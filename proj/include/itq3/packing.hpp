#pragma once

#include "itq3/quantizer.hpp"

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

// Block byte layout (all multi-byte fields little-endian):
//
//   quants      3n/8 bytes   three bit-planes of the stored codes c = q + 1
//   scale       2 bytes      binary16 step d
//   zero-point  2 bytes      binary16 z in {-1, 0, 1}
//   sub-scales  8 x 2 bytes  binary16 per sub-block step (variant SS only)
//
// Plane b holds bit b of every stored code; plane bit j lives at byte j/8,
// bit position j%8 of that plane. For n = 256 a block is 100 bytes (S) or
// 116 bytes (SS).

namespace itq3::pack {

enum class Variant : std::uint8_t { S, SS };

inline constexpr std::size_t kSubBlocks = 8;
inline constexpr std::size_t kMaxCodes = 512;

constexpr std::size_t quants_bytes(std::size_t n) { return 3 * n / 8; }

constexpr std::size_t block_bytes(std::size_t n, Variant variant) {
  return quants_bytes(n) + 4 + (variant == Variant::SS ? 2 * kSubBlocks : 0);
}

std::vector<std::uint8_t> pack_ternary(std::span<const std::int8_t> codes);
void pack_ternary(std::span<const std::int8_t> codes, std::span<std::uint8_t> out);

// Throws ErrorKind::Corruption naming the first index whose reassembled
// stored code exceeds 2.
std::vector<std::int8_t> unpack_ternary(std::span<const std::uint8_t> bytes,
                                        std::size_t n);
void unpack_ternary(std::span<const std::uint8_t> bytes,
                    std::span<std::int8_t> codes);

struct PackedBlock {
  std::size_t n = 0;
  Variant variant = Variant::S;
  std::vector<std::uint8_t> quants;
  std::uint16_t scale_bits = 0;
  std::uint16_t zp_bits = 0;
  std::array<std::uint16_t, kSubBlocks> sub_scale_bits{}; // SS only

  std::size_t byte_size() const { return block_bytes(n, variant); }
  void append_to(std::vector<std::uint8_t> &out) const;
  std::vector<std::uint8_t> to_bytes() const;

  bool operator==(const PackedBlock &) const = default;
};

// Assembles a block from codes and a grid. sub_scales must hold exactly
// kSubBlocks steps for variant SS and be absent for S.
PackedBlock make_block(std::span<const std::int8_t> codes,
                       const quant::TernaryGrid &grid,
                       std::optional<std::span<const double>> sub_scales = {});

std::vector<std::uint8_t>
serialize_block(std::span<const std::int8_t> codes, const quant::TernaryGrid &grid,
                std::optional<std::span<const double>> sub_scales = {});

// Parses and validates one block: code planes, NaN / non-positive steps and
// a zero-point outside {-1, 0, 1} are corruption errors.
PackedBlock deserialize_block(std::span<const std::uint8_t> bytes, std::size_t n,
                              Variant variant);

// Decoded metadata, the steps the decoder will use.
struct BlockScales {
  double d = 0.0;
  int z = 0;
  std::array<double, kSubBlocks> sub{};
};
BlockScales decode_scales(const PackedBlock &block);

} // namespace itq3::pack
