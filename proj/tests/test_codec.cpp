#include "itq3/codec.hpp"
#include "itq3/error.hpp"
#include "itq3/f16.hpp"
#include "itq3/synthetic.hpp"

#include <doctest.h>

#include <bit>
#include <cmath>
#include <random>
#include <vector>

using namespace itq3;

namespace {

// Independent decoder: unpack planes, scale, dense inverse Hadamard in double.
std::vector<double> reference_decode(const pack::PackedBlock &b) {
  const std::size_t n = b.n, plane = n / 8;
  std::vector<double> c(n);
  const double d = f16::decode(b.scale_bits);
  const int z = static_cast<int>(f16::decode(b.zp_bits));
  for (std::size_t j = 0; j < n; ++j) {
    int stored = 0;
    for (int p = 0; p < 3; ++p)
      stored |= ((b.quants[p * plane + j / 8] >> (j % 8)) & 1) << p;
    const double step =
        b.variant == pack::Variant::SS ? f16::decode(b.sub_scale_bits[j / (n / 8)]) : d;
    c[j] = step * static_cast<double>(stored - 1 - z);
  }
  std::vector<double> out(n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      out[i] += ((std::popcount(i & j) & 1) ? -c[j] : c[j]);
  for (double &x : out)
    x /= std::sqrt(static_cast<double>(n));
  return out;
}

std::vector<float> gaussian(std::size_t n, std::uint64_t seed, double sigma = 1.0) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<float> g(0.0f, static_cast<float>(sigma));
  std::vector<float> v(n);
  for (float &x : v)
    x = g(rng);
  return v;
}

} // namespace

TEST_CASE("representable step") {
  CHECK(codec::representable_step(1.0) == 1.0);
  CHECK(codec::representable_step(0.1) == f16::decode(f16::encode(0.1)));
  CHECK(codec::representable_step(1e-8) == std::ldexp(1.0, -24));
}

TEST_CASE("encoded block decodes like the reference decoder") {
  for (auto variant : {pack::Variant::S, pack::Variant::SS}) {
    for (std::size_t n : {32u, 64u, 128u, 256u, 512u}) {
      codec::QuantConfig cfg;
      cfg.block_n = n;
      cfg.variant = variant;
      const auto w = gaussian(n, 40 + n, 0.05);
      const auto block = codec::encode_block(w, cfg);
      CHECK(block.byte_size() == pack::block_bytes(n, variant));
      const auto got = codec::decode_block(block);
      const auto want = reference_decode(block);
      for (std::size_t i = 0; i < n; ++i)
        REQUIRE(std::abs(got[i] - want[i]) <= 1e-6);
    }
  }
}

TEST_CASE("codes follow the stored step") {
  codec::QuantConfig cfg;
  const auto w = gaussian(256, 41);
  const auto enc = codec::encode_block_detailed(w, cfg);
  const double d = enc.ternary.grid.d;
  CHECK(d == f16::decode(enc.block.scale_bits));
  for (std::size_t j = 0; j < 256; ++j) {
    const double r = std::round(enc.coeffs[j] / d);
    CHECK(enc.ternary.codes[j] == static_cast<int>(std::clamp(r, -1.0, 1.0)));
  }
}

TEST_CASE("SS block field is the mean of the sub-steps") {
  codec::QuantConfig cfg;
  cfg.variant = pack::Variant::SS;
  auto w = gaussian(256, 42);
  const auto enc = codec::encode_block_detailed(w, cfg);
  double sum = 0.0;
  for (std::size_t m = 0; m < 8; ++m) {
    CHECK(enc.ternary.sub_steps[m] == f16::decode(enc.block.sub_scale_bits[m]));
    sum += enc.ternary.sub_steps[m];
  }
  CHECK(f16::decode(enc.block.scale_bits) == f16::decode(f16::encode(sum / 8.0)));
}

TEST_CASE("zero block stores the smallest step and decodes to zero") {
  codec::QuantConfig cfg;
  cfg.block_n = 64;
  const std::vector<float> w(64, 0.0f);
  const auto block = codec::encode_block(w, cfg);
  CHECK(block.scale_bits == f16::kMinSubnormal);
  for (float x : codec::decode_block(block))
    CHECK(x == 0.0f);
}

TEST_CASE("asymmetric zero-point stays in range") {
  codec::QuantConfig cfg;
  cfg.block_n = 64;
  cfg.symmetric = false;
  std::vector<float> w(64, 0.0f);
  w[0] = 50.0f; // DC coefficient dominates the rotated block
  const auto enc = codec::encode_block_detailed(w, cfg);
  CHECK(enc.ternary.grid.z >= -1);
  CHECK(enc.ternary.grid.z <= 1);
  const auto scales = pack::decode_scales(enc.block);
  CHECK(scales.z == enc.ternary.grid.z);
  const auto got = codec::decode_block(enc.block);
  const auto want = reference_decode(enc.block);
  for (std::size_t i = 0; i < 64; ++i)
    CHECK(std::abs(got[i] - want[i]) <= 1e-5);
}

TEST_CASE("tensor flattening and padding") {
  codec::Matrix w(3, 100);
  for (std::size_t i = 0; i < w.values.size(); ++i)
    w.values[i] = std::sin(0.1f * static_cast<float>(i));
  codec::QuantConfig cfg;
  cfg.block_n = 128;
  const auto q = codec::quantize_tensor(w, cfg);
  CHECK(q.blocks.size() == 3);
  CHECK(q.pad == 84);
  CHECK(codec::block_count(3, 100, 128) == 3);
  const auto back = codec::dequantize_tensor(q);
  CHECK(back.rows == 3);
  CHECK(back.cols == 100);
  // The first block's reconstruction equals decoding it directly.
  const auto first = codec::decode_block(q.blocks[0]);
  for (std::size_t i = 0; i < 128; ++i)
    CHECK(back.values[i] == first[i]);
}

TEST_CASE("tensor validation") {
  codec::QuantConfig cfg;
  CHECK_THROWS_AS(codec::quantize_tensor(codec::Matrix(0, 5), cfg), Error);
  codec::Matrix bad(1, 4);
  bad.values.push_back(1.0f);
  try {
    codec::check_tensor(bad);
    FAIL("expected shape error");
  } catch (const Error &e) {
    CHECK(e.kind() == ErrorKind::Shape);
  }
  codec::Matrix nan(2, 2);
  nan.values[3] = NAN;
  try {
    codec::quantize_tensor(nan, cfg);
    FAIL("expected domain error");
  } catch (const Error &e) {
    CHECK(e.kind() == ErrorKind::Domain);
  }
  cfg.block_n = 48;
  try {
    codec::quantize_tensor(codec::Matrix(2, 2), cfg);
    FAIL("expected length error");
  } catch (const Error &e) {
    CHECK(e.kind() == ErrorKind::Length);
  }
}

TEST_CASE("quantized tensor consistency is checked") {
  codec::QuantConfig cfg;
  cfg.block_n = 32;
  auto q = codec::quantize_tensor(codec::Matrix(4, 16), cfg);
  q.blocks.pop_back();
  try {
    codec::dequantize_tensor(q);
    FAIL("expected size mismatch");
  } catch (const Error &e) {
    CHECK(e.kind() == ErrorKind::SizeMismatch);
  }
}

TEST_CASE("reconstruction error shrinks as blocks become Gaussian") {
  synth::GeneratorSpec spec;
  spec.rows = 16;
  spec.cols = 1024;
  spec.seed = 43;
  const auto w = synth::generate(spec);
  const auto back = codec::dequantize_tensor(codec::quantize_tensor(w, {}));
  double err = 0.0, ref = 0.0;
  for (std::size_t i = 0; i < w.values.size(); ++i) {
    err += std::pow(double(w.values[i]) - back.values[i], 2);
    ref += std::pow(double(w.values[i]), 2);
  }
  // Ternary on unit Gaussian coefficients keeps roughly a third of the energy error.
  CHECK(err / ref < 0.35);
  CHECK(err / ref > 0.15);
}
