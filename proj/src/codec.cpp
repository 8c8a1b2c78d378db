#include "itq3/codec.hpp"

#include "itq3/error.hpp"
#include "itq3/f16.hpp"
#include "itq3/transform.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace itq3::codec {

namespace {

constexpr double kSmallestHalf = 0x1p-24;

quant::TernaryGrid make_grid(double d, const quant::BlockStats &stats, bool symmetric) {
  quant::TernaryGrid grid{representable_step(d), 0};
  if (!symmetric) {
    const double z = -std::round(stats.mean / grid.d);
    grid.z = static_cast<int>(std::clamp(z, -1.0, 1.0));
  }
  return grid;
}

} // namespace

void check_tensor(const Matrix &w) {
  if (w.rows == 0 || w.cols == 0)
    throw Error(ErrorKind::Shape, "tensor dimensions must be positive");
  if (w.rows > std::numeric_limits<std::size_t>::max() / w.cols ||
      w.rows * w.cols != w.values.size()) {
    throw Error(ErrorKind::Shape, "tensor holds " + std::to_string(w.values.size()) +
                                      " values, expected " + std::to_string(w.rows) +
                                      "x" + std::to_string(w.cols));
  }
  for (std::size_t i = 0; i < w.values.size(); ++i) {
    if (!std::isfinite(w.values[i]))
      throw Error(ErrorKind::Domain, "non-finite weight at flat index " + std::to_string(i));
  }
}

bool is_valid_block_size(std::size_t n) noexcept {
  return n == 32 || n == 64 || n == 128 || n == 256 || n == 512;
}

void check_config(const QuantConfig &cfg) {
  if (!is_valid_block_size(cfg.block_n)) {
    throw Error(ErrorKind::Length, "block size " + std::to_string(cfg.block_n) +
                                       " is not one of 32, 64, 128, 256, 512");
  }
  if (cfg.policy.kind == quant::ScaleKind::FixedConstant &&
      (!(cfg.policy.constant > 0.0) || !std::isfinite(cfg.policy.constant))) {
    throw Error(ErrorKind::Domain, "scale constant must be positive");
  }
}

std::size_t block_count(std::size_t rows, std::size_t cols, std::size_t block_n) {
  const std::size_t total = rows * cols;
  return (total + block_n - 1) / block_n;
}

double representable_step(double d) {
  const double h = f16::round_to_half(d);
  return h > 0.0 ? h : kSmallestHalf;
}

TernaryEncoding quantize_coefficients(std::span<const float> coeffs,
                                      const QuantConfig &cfg) {
  const std::size_t n = coeffs.size();
  const quant::BlockStats stats = quant::block_stats(coeffs);

  TernaryEncoding enc;
  enc.codes.resize(n);
  enc.steps.resize(n);

  if (cfg.variant == pack::Variant::S) {
    enc.grid = make_grid(quant::optimal_scale(stats, cfg.policy), stats, cfg.symmetric);
    std::fill(enc.steps.begin(), enc.steps.end(), enc.grid.d);
  } else {
    const std::size_t sub = n / pack::kSubBlocks;
    double sum = 0.0;
    for (std::size_t m = 0; m < pack::kSubBlocks; ++m) {
      const auto part = coeffs.subspan(m * sub, sub);
      const double dm =
          representable_step(quant::optimal_scale(quant::block_stats(part), cfg.policy));
      enc.sub_steps[m] = dm;
      sum += dm;
      std::fill_n(enc.steps.begin() + static_cast<std::ptrdiff_t>(m * sub), sub, dm);
    }
    // The block field only records the mean sub-block step.
    enc.grid = make_grid(sum / static_cast<double>(pack::kSubBlocks), stats, cfg.symmetric);
  }

  for (std::size_t j = 0; j < n; ++j) {
    const quant::TernaryGrid g{enc.steps[j], enc.grid.z};
    const int raw = quant::ternary_quantize_raw(coeffs[j], g);
    if (raw < -1 || raw > 1)
      ++enc.clamped;
    enc.codes[j] = static_cast<std::int8_t>(std::clamp(raw, -1, 1));
  }
  return enc;
}

std::vector<float> dequantize_coefficients(std::span<const std::int8_t> codes,
                                           const pack::BlockScales &scales,
                                           pack::Variant variant) {
  const std::size_t n = codes.size();
  const std::size_t sub = n / pack::kSubBlocks;
  std::vector<float> out(n);
  for (std::size_t j = 0; j < n; ++j) {
    const double d = variant == pack::Variant::SS ? scales.sub[j / sub] : scales.d;
    // Exact in binary32: d is a half value and code - z is in [-2, 2].
    out[j] = static_cast<float>(d * static_cast<double>(codes[j] - scales.z));
  }
  return out;
}

BlockEncoding encode_block_detailed(std::span<const float> w, const QuantConfig &cfg) {
  check_config(cfg);
  if (w.size() != cfg.block_n) {
    throw Error(ErrorKind::Length, "block has " + std::to_string(w.size()) +
                                       " values, config expects " + std::to_string(cfg.block_n));
  }

  BlockEncoding out;
  out.coeffs = transform::fwht_forward(w);
  out.ternary = quantize_coefficients(out.coeffs, cfg);
  if (cfg.variant == pack::Variant::SS) {
    out.block = pack::make_block(out.ternary.codes, out.ternary.grid,
                                 std::span<const double>(out.ternary.sub_steps));
  } else {
    out.block = pack::make_block(out.ternary.codes, out.ternary.grid);
  }
  return out;
}

pack::PackedBlock encode_block(std::span<const float> w, const QuantConfig &cfg) {
  return encode_block_detailed(w, cfg).block;
}

void decode_block(const pack::PackedBlock &block, std::span<float> out) {
  if (out.size() != block.n)
    throw Error(ErrorKind::Length, "decode buffer size does not match block length");
  const pack::BlockScales scales = pack::decode_scales(block);
  std::vector<std::int8_t> codes(block.n);
  pack::unpack_ternary(block.quants, codes);
  const std::vector<float> v = dequantize_coefficients(codes, scales, block.variant);
  std::copy(v.begin(), v.end(), out.begin());
  transform::fwht_inplace(out);
}

std::vector<float> decode_block(const pack::PackedBlock &block) {
  std::vector<float> out(block.n);
  decode_block(block, out);
  return out;
}

QuantizedTensor quantize_tensor(const WeightTensor &w, const QuantConfig &cfg) {
  check_tensor(w);
  check_config(cfg);

  const std::size_t n = cfg.block_n;
  const std::size_t total = w.values.size();

  QuantizedTensor q;
  q.rows = w.rows;
  q.cols = w.cols;
  q.block_n = n;
  q.variant = cfg.variant;
  q.asymmetric = !cfg.symmetric;
  const std::size_t count = block_count(w.rows, w.cols, n);
  q.pad = count * n - total;
  q.blocks.reserve(count);

  std::vector<float> scratch(n);
  for (std::size_t b = 0; b < count; ++b) {
    const std::size_t begin = b * n;
    const std::size_t len = std::min(n, total - begin);
    std::fill(scratch.begin(), scratch.end(), 0.0f);
    std::copy_n(w.values.begin() + static_cast<std::ptrdiff_t>(begin), len, scratch.begin());
    q.blocks.push_back(encode_block(scratch, cfg));
  }
  return q;
}

void check_quantized(const QuantizedTensor &q) {
  if (q.rows == 0 || q.cols == 0 || q.rows > std::numeric_limits<std::size_t>::max() / q.cols)
    throw Error(ErrorKind::Shape, "quantized tensor has invalid dimensions");
  if (!is_valid_block_size(q.block_n))
    throw Error(ErrorKind::Length, "invalid block size " + std::to_string(q.block_n));
  const std::size_t count = block_count(q.rows, q.cols, q.block_n);
  if (q.blocks.size() != count || q.pad != count * q.block_n - q.rows * q.cols) {
    throw Error(ErrorKind::SizeMismatch,
                "quantized tensor holds " + std::to_string(q.blocks.size()) +
                    " blocks with pad " + std::to_string(q.pad) + ", expected " +
                    std::to_string(count) + " blocks");
  }
  for (std::size_t b = 0; b < q.blocks.size(); ++b) {
    const pack::PackedBlock &blk = q.blocks[b];
    if (blk.n != q.block_n || blk.variant != q.variant ||
        blk.quants.size() != pack::quants_bytes(q.block_n)) {
      throw Error(ErrorKind::SizeMismatch, "block " + std::to_string(b) +
                                               " does not match the tensor layout");
    }
  }
}

WeightTensor dequantize_tensor(const QuantizedTensor &q) {
  check_quantized(q);
  WeightTensor w(q.rows, q.cols);
  const std::size_t total = w.values.size();
  std::vector<float> scratch(q.block_n);
  for (std::size_t b = 0; b < q.blocks.size(); ++b) {
    try {
      decode_block(q.blocks[b], scratch);
    } catch (const Error &e) {
      throw Error(e.kind(), "block " + std::to_string(b) + ": " + e.what());
    }
    const std::size_t begin = b * q.block_n;
    const std::size_t len = std::min(q.block_n, total - begin);
    std::copy_n(scratch.begin(), len, w.values.begin() + static_cast<std::ptrdiff_t>(begin));
  }
  return w;
}

} // namespace itq3::codec
