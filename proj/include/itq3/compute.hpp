#pragma once

#include "itq3/codec.hpp"
#include "itq3/synthetic.hpp"

#include <cstddef>
#include <span>
#include <vector>

namespace itq3::compute {

// y = W x with W decoded block by block into a scratch tile. Each output
// element accumulates in double, strictly left to right over columns.
std::vector<float> fused_matvec(const codec::QuantizedTensor &q, std::span<const float> x);

// Y = W X for X of shape cols x k. Every block is decoded exactly once.
codec::Matrix fused_matmul(const codec::QuantizedTensor &q, const codec::Matrix &x);

// Dense reference with the same accumulation order.
codec::Matrix dense_matmul(const codec::Matrix &w, const codec::Matrix &x);

struct ErrorReport {
  double mse = 0.0;            // mean squared error over logical weights
  double frobenius_rel = 0.0;  // ||W_hat - W||_F / ||W||_F (0 for a zero W)
  double linf_in = 0.0;        // mean over blocks of ||w||_inf
  double linf_rot = 0.0;       // mean over blocks of ||H w||_inf
  double bound_slack = 0.0;    // min over unclamped blocks of sum(d^2)/4 - err^2
  double clamp_fraction = 0.0; // saturated coefficients / all coefficients
  double zero_fraction = 0.0;  // coefficients coded to zero / all coefficients

  // Baselines on the raw (unrotated) blocks.
  double uniform3_mse = 0.0;   // uniform 3-bit, per-block min/max range
  double norot_mse = 0.0;      // same ternary quantizer without the transform

  double median_block_mse = 0.0;
  double median_block_mse_norot = 0.0;
  double median_block_mse_uniform3 = 0.0;

  // max over blocks of | ||w_hat - w|| - ||deq(q) - Hw|| | / ||deq(q) - Hw||
  double transfer_max_rel = 0.0;
  std::size_t blocks = 0;
  std::size_t unclamped_blocks = 0;
  std::size_t bound_violations = 0;
};

// Per-block squared-error sums (padded blocks included in full).
struct BlockErrors {
  std::vector<double> rotated;
  std::vector<double> unrotated;
  std::vector<double> uniform3;
  std::vector<double> transform_domain; // ||deq(q) - Hw||^2
  std::vector<double> bound;            // sum of step^2 / 4
  std::vector<std::size_t> clamped;
};

// Quantizes with cfg, decodes and reports.
ErrorReport eval_error(const codec::WeightTensor &w, const codec::QuantConfig &cfg);

// Reports on an existing quantization of w. baseline_policy drives the
// unrotated ternary baseline.
ErrorReport eval_error(const codec::WeightTensor &w, const codec::QuantizedTensor &q,
                       const quant::ScalePolicy &baseline_policy);

BlockErrors block_errors(const codec::WeightTensor &w, const codec::QuantizedTensor &q,
                         const quant::ScalePolicy &baseline_policy);

struct AblationRow {
  std::size_t block_n = 0;
  double mse = 0.0;
  double median_block_mse = 0.0;
  double relative_overhead = 0.0; // (log2 n + 1) transform flops per weight
};

// One tensor is generated from gen (same seed for every size) and quantized
// at each block size in sweep.
std::vector<AblationRow> ablate_block_size(const synth::GeneratorSpec &gen,
                                           std::span<const std::size_t> sweep,
                                           const codec::QuantConfig &base);

double median(std::vector<double> v);

} // namespace itq3::compute
