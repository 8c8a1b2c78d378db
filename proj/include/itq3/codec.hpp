#pragma once

#include "itq3/packing.hpp"
#include "itq3/quantizer.hpp"

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace itq3::codec {

// Dense row-major matrix of binary32 values.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<float> values;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), values(r * c, 0.0f) {}
  Matrix(std::size_t r, std::size_t c, std::vector<float> v)
      : rows(r), cols(c), values(std::move(v)) {}

  float &operator()(std::size_t r, std::size_t c) { return values[r * cols + c]; }
  float operator()(std::size_t r, std::size_t c) const { return values[r * cols + c]; }

  bool operator==(const Matrix &) const = default;
};

using WeightTensor = Matrix;

// Positive dims, rows * cols == values.size(), all values finite.
void check_tensor(const Matrix &w);

struct QuantConfig {
  std::size_t block_n = 256;
  pack::Variant variant = pack::Variant::S;
  quant::ScalePolicy policy;
  bool symmetric = true;
};

bool is_valid_block_size(std::size_t n) noexcept;
void check_config(const QuantConfig &cfg);

struct QuantizedTensor {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::size_t block_n = 256;
  pack::Variant variant = pack::Variant::S;
  bool asymmetric = false;
  std::size_t pad = 0; // zeros appended to the last block
  std::vector<pack::PackedBlock> blocks;

  bool operator==(const QuantizedTensor &) const = default;
};

std::size_t block_count(std::size_t rows, std::size_t cols, std::size_t block_n);

// Round a step to the nearest binary16 value, never to zero. Quantizing
// with the stored step keeps encoder and decoder on the same grid.
double representable_step(double d);

// Ternary coding of one vector that is already in the quantization domain.
struct TernaryEncoding {
  std::vector<std::int8_t> codes;
  quant::TernaryGrid grid;                      // grid.d is the block scale field
  std::array<double, pack::kSubBlocks> sub_steps{}; // variant SS only
  std::vector<double> steps;                    // per-element step used
  std::size_t clamped = 0;                      // coefficients that saturated
};

TernaryEncoding quantize_coefficients(std::span<const float> coeffs,
                                      const QuantConfig &cfg);

// d_j * (code_j - z) for every element, as binary32.
std::vector<float> dequantize_coefficients(std::span<const std::int8_t> codes,
                                           const pack::BlockScales &scales,
                                           pack::Variant variant);

struct BlockEncoding {
  pack::PackedBlock block;
  std::vector<float> coeffs; // forward transform of the input
  TernaryEncoding ternary;
};

BlockEncoding encode_block_detailed(std::span<const float> w, const QuantConfig &cfg);
pack::PackedBlock encode_block(std::span<const float> w, const QuantConfig &cfg);

void decode_block(const pack::PackedBlock &block, std::span<float> out);
std::vector<float> decode_block(const pack::PackedBlock &block);

QuantizedTensor quantize_tensor(const WeightTensor &w, const QuantConfig &cfg);
WeightTensor dequantize_tensor(const QuantizedTensor &q);

// Shape and per-block consistency of a tensor built in memory or parsed.
void check_quantized(const QuantizedTensor &q);

} // namespace itq3::codec
