#include "itq3/error.hpp"
#include "itq3/f16.hpp"
#include "itq3/packing.hpp"

#include <doctest.h>

#include <array>
#include <fstream>
#include <iterator>
#include <random>
#include <string>
#include <vector>

using namespace itq3;

namespace {

std::vector<std::uint8_t> slurp(const std::string &name) {
  std::ifstream in(std::string(ITQ3_GOLDEN_DIR) + "/" + name, std::ios::binary);
  REQUIRE(in);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::vector<std::int8_t> golden_codes() {
  std::vector<std::int8_t> codes(256);
  for (std::size_t j = 0; j < codes.size(); ++j)
    codes[j] = static_cast<std::int8_t>(static_cast<int>((j * 7) % 3) - 1);
  return codes;
}

ErrorKind kind_of(auto &&fn) {
  try {
    fn();
  } catch (const Error &e) {
    return e.kind();
  }
  FAIL("no error raised");
  return ErrorKind::Usage;
}

} // namespace

TEST_CASE("block sizes") {
  CHECK(pack::quants_bytes(256) == 96);
  CHECK(pack::block_bytes(256, pack::Variant::S) == 100);
  CHECK(pack::block_bytes(256, pack::Variant::SS) == 116);
  CHECK(pack::block_bytes(32, pack::Variant::S) == 16);
  CHECK(pack::block_bytes(512, pack::Variant::SS) == 212);
}

TEST_CASE("plane layout by hand") {
  // codes -1, 0, 1 store 0, 1, 2; bit j of each plane is element j.
  const std::vector<std::int8_t> codes{-1, 0, 1, 1, 0, -1, 1, 0};
  const auto bytes = pack::pack_ternary(codes);
  REQUIRE(bytes.size() == 3);
  CHECK(bytes[0] == 0b10010010); // stored 1 at indices 1, 4, 7
  CHECK(bytes[1] == 0b01001100); // stored 2 at indices 2, 3, 6
  CHECK(bytes[2] == 0);
}

TEST_CASE("exhaustive bijection for n=8") {
  std::vector<std::int8_t> codes(8);
  int count = 0;
  for (int m = 0; m < 6561; ++m) {
    int r = m;
    for (auto &c : codes) {
      c = static_cast<std::int8_t>(r % 3 - 1);
      r /= 3;
    }
    const auto back = pack::unpack_ternary(pack::pack_ternary(codes), 8);
    REQUIRE(back == codes);
    ++count;
  }
  CHECK(count == 6561);
}

TEST_CASE("random round trips at every supported size") {
  std::mt19937_64 rng(31);
  std::uniform_int_distribution<int> u(-1, 1);
  for (std::size_t n = 8; n <= 512; n += 8) {
    std::vector<std::int8_t> codes(n);
    for (auto &c : codes)
      c = static_cast<std::int8_t>(u(rng));
    const auto bytes = pack::pack_ternary(codes);
    REQUIRE(bytes.size() == 3 * n / 8);
    REQUIRE(pack::unpack_ternary(bytes, n) == codes);
  }
}

TEST_CASE("packing rejects bad lengths and codes") {
  std::vector<std::int8_t> odd(12, 0);
  CHECK(kind_of([&] { pack::pack_ternary(odd); }) == ErrorKind::Length);
  std::vector<std::int8_t> huge(520, 0);
  CHECK(kind_of([&] { pack::pack_ternary(huge); }) == ErrorKind::Length);
  std::vector<std::int8_t> bad(8, 0);
  bad[5] = 2;
  CHECK(kind_of([&] { pack::pack_ternary(bad); }) == ErrorKind::Domain);
}

TEST_CASE("stored values above 2 are corruption") {
  std::vector<std::int8_t> codes(16, 0);
  auto bytes = pack::pack_ternary(codes);
  bytes[2 * 2 + 1] |= 0x04; // plane 2, element 10
  try {
    pack::unpack_ternary(bytes, 16);
    FAIL("expected corruption");
  } catch (const Error &e) {
    CHECK(e.kind() == ErrorKind::Corruption);
    CHECK(std::string(e.what()).find("index 10") != std::string::npos);
  }
  bytes = pack::pack_ternary(codes);
  bytes[0] = 0x01; // plane 0 and plane 1 both set: stored 3
  bytes[2] = 0x01;
  CHECK(kind_of([&] { pack::unpack_ternary(bytes, 16); }) == ErrorKind::Corruption);
}

TEST_CASE("S block matches golden bytes") {
  const auto codes = golden_codes();
  const auto bytes = pack::serialize_block(codes, {0.5, 0});
  CHECK(bytes == slurp("block_s_256.bin"));
  const auto block = pack::deserialize_block(bytes, 256, pack::Variant::S);
  CHECK(block.scale_bits == 0x3800);
  CHECK(block.zp_bits == 0x0000);
  CHECK(pack::unpack_ternary(block.quants, 256) == codes);
}

TEST_CASE("SS block matches golden bytes") {
  const auto codes = golden_codes();
  std::array<double, 8> subs{};
  double sum = 0.0;
  for (std::size_t m = 0; m < 8; ++m) {
    subs[m] = 0.25 * double(m + 1);
    sum += subs[m];
  }
  const auto bytes =
      pack::serialize_block(codes, {sum / 8.0, 0}, std::span<const double>(subs));
  CHECK(bytes == slurp("block_ss_256.bin"));
  const auto block = pack::deserialize_block(bytes, 256, pack::Variant::SS);
  const auto scales = pack::decode_scales(block);
  for (std::size_t m = 0; m < 8; ++m)
    CHECK(scales.sub[m] == subs[m]);
  CHECK(scales.d == 1.125);
}

TEST_CASE("deserialize validates metadata") {
  const auto codes = golden_codes();
  auto bytes = pack::serialize_block(codes, {0.5, 0});
  CHECK(kind_of([&] {
          pack::deserialize_block(std::span(bytes).first(99), 256, pack::Variant::S);
        }) == ErrorKind::Truncated);

  auto nan_scale = bytes;
  nan_scale[96] = 0x00;
  nan_scale[97] = 0x7E;
  CHECK(kind_of([&] { pack::deserialize_block(nan_scale, 256, pack::Variant::S); }) ==
        ErrorKind::Corruption);

  auto neg_scale = bytes;
  neg_scale[97] |= 0x80;
  CHECK(kind_of([&] { pack::deserialize_block(neg_scale, 256, pack::Variant::S); }) ==
        ErrorKind::Corruption);

  auto bad_zp = bytes;
  const std::uint16_t two = f16::encode(2.0);
  bad_zp[98] = static_cast<std::uint8_t>(two & 0xFF);
  bad_zp[99] = static_cast<std::uint8_t>(two >> 8);
  CHECK(kind_of([&] { pack::deserialize_block(bad_zp, 256, pack::Variant::S); }) ==
        ErrorKind::Corruption);

  auto neg_zp = bytes;
  const std::uint16_t minus_one = f16::encode(-1.0);
  neg_zp[98] = static_cast<std::uint8_t>(minus_one & 0xFF);
  neg_zp[99] = static_cast<std::uint8_t>(minus_one >> 8);
  CHECK(pack::decode_scales(pack::deserialize_block(neg_zp, 256, pack::Variant::S)).z == -1);
}

TEST_CASE("packed block equality and serialization agree") {
  const auto codes = golden_codes();
  const auto a = pack::make_block(codes, {0.5, 0});
  const auto b = pack::deserialize_block(a.to_bytes(), 256, pack::Variant::S);
  CHECK(a == b);
  CHECK(a.byte_size() == 100);
}
