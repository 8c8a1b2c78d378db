#include "itq3/packing.hpp"

#include "itq3/error.hpp"
#include "itq3/f16.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <string>

namespace itq3::pack {

namespace {

void check_code_length(std::size_t n) {
  if (n == 0 || n % 8 != 0 || n > kMaxCodes) {
    throw Error(ErrorKind::Length, "ternary code count " + std::to_string(n) +
                                       " is not a positive multiple of 8 up to 512");
  }
}

void put_u16(std::vector<std::uint8_t> &out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v & 0xFF));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
}

std::uint16_t get_u16(std::span<const std::uint8_t> bytes, std::size_t at) {
  return static_cast<std::uint16_t>(bytes[at] | (bytes[at + 1] << 8));
}

std::uint16_t encode_step(double d, const char *what) {
  if (!(d > 0.0) || !std::isfinite(d))
    throw Error(ErrorKind::Domain, std::string(what) + " must be positive and finite");
  const std::uint16_t bits = f16::encode(d);
  if (f16::decode(bits) == 0.0)
    throw Error(ErrorKind::Domain, std::string(what) + " underflows binary16");
  return bits;
}

double decode_step(std::uint16_t bits, const char *what) {
  const double d = f16::decode(bits);
  if (f16::is_nan(bits) || !std::isfinite(d) || !(d > 0.0))
    throw Error(ErrorKind::Corruption, std::string(what) + " is not a positive finite half");
  return d;
}

} // namespace

void pack_ternary(std::span<const std::int8_t> codes, std::span<std::uint8_t> out) {
  const std::size_t n = codes.size();
  check_code_length(n);
  if (out.size() != quants_bytes(n))
    throw Error(ErrorKind::Length, "pack buffer must hold 3n/8 bytes");

  const std::size_t plane = n / 8;
  std::fill(out.begin(), out.end(), std::uint8_t{0});
  for (std::size_t j = 0; j < n; ++j) {
    const int q = codes[j];
    if (q < -1 || q > 1) {
      throw Error(ErrorKind::Domain, "ternary code " + std::to_string(q) +
                                         " at index " + std::to_string(j));
    }
    const unsigned c = static_cast<unsigned>(q + 1);
    const std::size_t byte = j / 8;
    const unsigned bit = j % 8;
    for (unsigned b = 0; b < 3; ++b)
      out[b * plane + byte] |= static_cast<std::uint8_t>(((c >> b) & 1u) << bit);
  }
}

std::vector<std::uint8_t> pack_ternary(std::span<const std::int8_t> codes) {
  check_code_length(codes.size());
  std::vector<std::uint8_t> out(quants_bytes(codes.size()));
  pack_ternary(codes, out);
  return out;
}

void unpack_ternary(std::span<const std::uint8_t> bytes, std::span<std::int8_t> codes) {
  const std::size_t n = codes.size();
  check_code_length(n);
  if (bytes.size() != quants_bytes(n)) {
    throw Error(ErrorKind::Length, "expected " + std::to_string(quants_bytes(n)) +
                                       " quant bytes for " + std::to_string(n) +
                                       " codes, got " + std::to_string(bytes.size()));
  }

  const std::size_t plane = n / 8;
  for (std::size_t byte = 0; byte < plane; ++byte) {
    const unsigned p0 = bytes[byte];
    const unsigned p1 = bytes[plane + byte];
    const unsigned p2 = bytes[2 * plane + byte];
    // Stored codes 3..7 need plane 2, or planes 0 and 1 together.
    const unsigned bad = (p0 & p1) | p2;
    if (bad != 0) {
      const std::size_t index = byte * 8 + static_cast<std::size_t>(std::countr_zero(bad));
      throw Error(ErrorKind::Corruption,
                  "stored ternary code > 2 at index " + std::to_string(index));
    }
    for (unsigned bit = 0; bit < 8; ++bit) {
      const unsigned c = ((p0 >> bit) & 1u) | (((p1 >> bit) & 1u) << 1);
      codes[byte * 8 + bit] = static_cast<std::int8_t>(static_cast<int>(c) - 1);
    }
  }
}

std::vector<std::int8_t> unpack_ternary(std::span<const std::uint8_t> bytes,
                                        std::size_t n) {
  check_code_length(n);
  std::vector<std::int8_t> codes(n);
  unpack_ternary(bytes, codes);
  return codes;
}

void PackedBlock::append_to(std::vector<std::uint8_t> &out) const {
  out.insert(out.end(), quants.begin(), quants.end());
  put_u16(out, scale_bits);
  put_u16(out, zp_bits);
  if (variant == Variant::SS) {
    for (const std::uint16_t s : sub_scale_bits)
      put_u16(out, s);
  }
}

std::vector<std::uint8_t> PackedBlock::to_bytes() const {
  std::vector<std::uint8_t> out;
  out.reserve(byte_size());
  append_to(out);
  return out;
}

PackedBlock make_block(std::span<const std::int8_t> codes,
                       const quant::TernaryGrid &grid,
                       std::optional<std::span<const double>> sub_scales) {
  if (grid.z < -1 || grid.z > 1)
    throw Error(ErrorKind::Domain, "zero-point must be in {-1, 0, 1}");

  PackedBlock block;
  block.n = codes.size();
  block.variant = sub_scales ? Variant::SS : Variant::S;
  block.quants = pack_ternary(codes);
  block.scale_bits = encode_step(grid.d, "block scale");
  block.zp_bits = f16::encode(static_cast<double>(grid.z));

  if (sub_scales) {
    if (sub_scales->size() != kSubBlocks) {
      throw Error(ErrorKind::Length, "variant SS needs exactly 8 sub-block scales, got " +
                                         std::to_string(sub_scales->size()));
    }
    for (std::size_t m = 0; m < kSubBlocks; ++m)
      block.sub_scale_bits[m] = encode_step((*sub_scales)[m], "sub-block scale");
  }
  return block;
}

std::vector<std::uint8_t> serialize_block(std::span<const std::int8_t> codes,
                                          const quant::TernaryGrid &grid,
                                          std::optional<std::span<const double>> sub_scales) {
  return make_block(codes, grid, sub_scales).to_bytes();
}

PackedBlock deserialize_block(std::span<const std::uint8_t> bytes, std::size_t n,
                              Variant variant) {
  check_code_length(n);
  const std::size_t expected = block_bytes(n, variant);
  if (bytes.size() != expected) {
    throw Error(ErrorKind::Truncated, "block needs " + std::to_string(expected) +
                                          " bytes, got " + std::to_string(bytes.size()));
  }

  PackedBlock block;
  block.n = n;
  block.variant = variant;
  const std::size_t qb = quants_bytes(n);
  block.quants.assign(bytes.begin(), bytes.begin() + static_cast<std::ptrdiff_t>(qb));
  block.scale_bits = get_u16(bytes, qb);
  block.zp_bits = get_u16(bytes, qb + 2);
  if (variant == Variant::SS) {
    for (std::size_t m = 0; m < kSubBlocks; ++m)
      block.sub_scale_bits[m] = get_u16(bytes, qb + 4 + 2 * m);
  }

  // Validate everything the decoder will touch.
  std::vector<std::int8_t> scratch(n);
  unpack_ternary(block.quants, scratch);
  (void)decode_scales(block);
  return block;
}

BlockScales decode_scales(const PackedBlock &block) {
  BlockScales s;
  s.d = decode_step(block.scale_bits, "block scale");
  const double z = f16::decode(block.zp_bits);
  if (!(z == -1.0 || z == 0.0 || z == 1.0))
    throw Error(ErrorKind::Corruption, "zero-point is not one of -1, 0, 1");
  s.z = static_cast<int>(z);
  if (block.variant == Variant::SS) {
    for (std::size_t m = 0; m < kSubBlocks; ++m)
      s.sub[m] = decode_step(block.sub_scale_bits[m], "sub-block scale");
  }
  return s;
}

} // namespace itq3::pack
