#include "itq3/compute.hpp"

#include "itq3/error.hpp"
#include "itq3/transform.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace itq3::compute {

namespace {

void check_finite(std::span<const float> v, const char *what) {
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!std::isfinite(v[i]))
      throw Error(ErrorKind::Domain, std::string(what) + " has a non-finite value at " +
                                         std::to_string(i));
  }
}

// Visits every decoded block once: fn(flat_begin, values of logical length).
template <typename Fn> void for_each_decoded_block(const codec::QuantizedTensor &q, Fn &&fn) {
  codec::check_quantized(q);
  const std::size_t total = q.rows * q.cols;
  std::vector<float> tile(q.block_n);
  for (std::size_t b = 0; b < q.blocks.size(); ++b) {
    codec::decode_block(q.blocks[b], tile);
    const std::size_t begin = b * q.block_n;
    const std::size_t len = std::min(q.block_n, total - begin);
    fn(begin, std::span<const float>(tile.data(), len));
  }
}

void padded_block(const codec::WeightTensor &w, std::size_t b, std::size_t n,
                  std::vector<float> &out) {
  const std::size_t begin = b * n;
  const std::size_t len = std::min(n, w.values.size() - begin);
  out.assign(n, 0.0f);
  std::copy_n(w.values.begin() + static_cast<std::ptrdiff_t>(begin), len, out.begin());
}

double squared_distance(std::span<const float> a, std::span<const float> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double e = static_cast<double>(a[i]) - static_cast<double>(b[i]);
    s += e * e;
  }
  return s;
}

double linf(std::span<const float> v) {
  double m = 0.0;
  for (const float x : v)
    m = std::max(m, static_cast<double>(std::abs(x)));
  return m;
}

} // namespace

double median(std::vector<double> v) {
  if (v.empty())
    return 0.0;
  const std::size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
  const double hi = v[mid];
  if (v.size() % 2 == 1)
    return hi;
  const double lo = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid));
  return 0.5 * (lo + hi);
}

std::vector<float> fused_matvec(const codec::QuantizedTensor &q, std::span<const float> x) {
  if (x.size() != q.cols) {
    throw Error(ErrorKind::Shape, "matvec input has " + std::to_string(x.size()) +
                                      " elements, tensor has " + std::to_string(q.cols) +
                                      " columns");
  }
  check_finite(x, "matvec input");

  std::vector<double> acc(q.rows, 0.0);
  for_each_decoded_block(q, [&](std::size_t begin, std::span<const float> tile) {
    for (std::size_t i = 0; i < tile.size(); ++i) {
      const std::size_t f = begin + i;
      acc[f / q.cols] += static_cast<double>(tile[i]) * static_cast<double>(x[f % q.cols]);
    }
  });

  std::vector<float> y(q.rows);
  std::transform(acc.begin(), acc.end(), y.begin(),
                 [](double v) { return static_cast<float>(v); });
  return y;
}

codec::Matrix fused_matmul(const codec::QuantizedTensor &q, const codec::Matrix &x) {
  if (x.rows != q.cols || x.values.size() != x.rows * x.cols) {
    throw Error(ErrorKind::Shape, "matmul operand has " + std::to_string(x.rows) +
                                      " rows, tensor has " + std::to_string(q.cols) +
                                      " columns");
  }
  check_finite(x.values, "matmul operand");

  const std::size_t k = x.cols;
  std::vector<double> acc(q.rows * k, 0.0);
  for_each_decoded_block(q, [&](std::size_t begin, std::span<const float> tile) {
    for (std::size_t i = 0; i < tile.size(); ++i) {
      const std::size_t f = begin + i;
      const std::size_t r = f / q.cols;
      const std::size_t c = f % q.cols;
      const double wv = tile[i];
      double *out = &acc[r * k];
      const float *xr = &x.values[c * k];
      for (std::size_t j = 0; j < k; ++j)
        out[j] += wv * static_cast<double>(xr[j]);
    }
  });

  codec::Matrix y(q.rows, k);
  std::transform(acc.begin(), acc.end(), y.values.begin(),
                 [](double v) { return static_cast<float>(v); });
  return y;
}

codec::Matrix dense_matmul(const codec::Matrix &w, const codec::Matrix &x) {
  if (w.cols != x.rows)
    throw Error(ErrorKind::Shape, "dense matmul inner dimensions differ");
  codec::Matrix y(w.rows, x.cols);
  for (std::size_t r = 0; r < w.rows; ++r) {
    for (std::size_t j = 0; j < x.cols; ++j) {
      double acc = 0.0;
      for (std::size_t c = 0; c < w.cols; ++c)
        acc += static_cast<double>(w(r, c)) * static_cast<double>(x(c, j));
      y(r, j) = static_cast<float>(acc);
    }
  }
  return y;
}

BlockErrors block_errors(const codec::WeightTensor &w, const codec::QuantizedTensor &q,
                         const quant::ScalePolicy &baseline_policy) {
  codec::check_tensor(w);
  codec::check_quantized(q);
  if (w.rows != q.rows || w.cols != q.cols)
    throw Error(ErrorKind::Shape, "reference and quantized tensor shapes differ");

  const std::size_t n = q.block_n;
  codec::QuantConfig baseline_cfg;
  baseline_cfg.block_n = n;
  baseline_cfg.variant = q.variant;
  baseline_cfg.policy = baseline_policy;
  baseline_cfg.symmetric = !q.asymmetric;

  BlockErrors out;
  std::vector<float> block;
  std::vector<float> recon(n);
  std::vector<std::int8_t> codes(n);
  for (std::size_t b = 0; b < q.blocks.size(); ++b) {
    const pack::PackedBlock &pb = q.blocks[b];
    padded_block(w, b, n, block);

    const std::vector<float> coeffs = transform::fwht_forward(block);
    const pack::BlockScales scales = pack::decode_scales(pb);
    pack::unpack_ternary(pb.quants, codes);
    const std::vector<float> deq = codec::dequantize_coefficients(codes, scales, q.variant);
    codec::decode_block(pb, recon);

    std::size_t clamped = 0;
    double bound = 0.0;
    const std::size_t sub = n / pack::kSubBlocks;
    for (std::size_t j = 0; j < n; ++j) {
      const double d = q.variant == pack::Variant::SS ? scales.sub[j / sub] : scales.d;
      bound += d * d / 4.0;
      const int raw = quant::ternary_quantize_raw(coeffs[j], {d, scales.z});
      if (raw < -1 || raw > 1)
        ++clamped;
    }

    out.rotated.push_back(squared_distance(recon, block));
    out.transform_domain.push_back(squared_distance(deq, coeffs));
    out.bound.push_back(bound);
    out.clamped.push_back(clamped);

    const codec::TernaryEncoding raw_enc = codec::quantize_coefficients(block, baseline_cfg);
    double norot = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      const double v = raw_enc.steps[j] * (raw_enc.codes[j] - raw_enc.grid.z);
      const double e = v - static_cast<double>(block[j]);
      norot += e * e;
    }
    out.unrotated.push_back(norot);

    const auto [mn, mx] = std::minmax_element(block.begin(), block.end());
    double uni = 0.0;
    if (*mn < *mx) {
      for (const float x : block) {
        const double e = quant::uniform_quantize(x, 3, *mn, *mx) - static_cast<double>(x);
        uni += e * e;
      }
    }
    out.uniform3.push_back(uni);
  }
  return out;
}

ErrorReport eval_error(const codec::WeightTensor &w, const codec::QuantizedTensor &q,
                       const quant::ScalePolicy &baseline_policy) {
  const BlockErrors be = block_errors(w, q, baseline_policy);
  const codec::WeightTensor recon = codec::dequantize_tensor(q);
  const std::size_t n = q.block_n;
  const auto nb = static_cast<double>(q.blocks.size());

  ErrorReport r;
  r.blocks = q.blocks.size();

  double err2 = 0.0;
  double ref2 = 0.0;
  for (std::size_t i = 0; i < w.values.size(); ++i) {
    const double e = static_cast<double>(recon.values[i]) - static_cast<double>(w.values[i]);
    err2 += e * e;
    ref2 += static_cast<double>(w.values[i]) * static_cast<double>(w.values[i]);
  }
  const auto count = static_cast<double>(w.values.size());
  r.mse = err2 / count;
  r.frobenius_rel = ref2 > 0.0 ? std::sqrt(err2 / ref2) : 0.0;

  std::vector<float> block;
  std::vector<std::int8_t> codes(n);
  std::size_t clamped = 0;
  std::size_t zeros = 0;
  double slack = std::numeric_limits<double>::infinity();
  double norot = 0.0;
  double uni = 0.0;
  std::vector<double> per_rot;
  std::vector<double> per_norot;
  std::vector<double> per_uni;
  for (std::size_t b = 0; b < q.blocks.size(); ++b) {
    padded_block(w, b, n, block);
    r.linf_in += linf(block);
    r.linf_rot += linf(transform::fwht_forward(block));

    pack::unpack_ternary(q.blocks[b].quants, codes);
    const int z = pack::decode_scales(q.blocks[b]).z;
    zeros += static_cast<std::size_t>(
        std::count_if(codes.begin(), codes.end(), [z](std::int8_t c) { return c == z; }));

    clamped += be.clamped[b];
    if (be.clamped[b] == 0) {
      ++r.unclamped_blocks;
      const double s = be.bound[b] - be.rotated[b];
      slack = std::min(slack, s);
      if (be.rotated[b] > be.bound[b] + 1e-6)
        ++r.bound_violations;
    }

    const double a = std::sqrt(be.rotated[b]);
    const double t = std::sqrt(be.transform_domain[b]);
    const double dev = std::abs(a - t) / std::max(t, std::numeric_limits<double>::min());
    r.transfer_max_rel = std::max(r.transfer_max_rel, t > 0.0 || a > 0.0 ? dev : 0.0);

    norot += be.unrotated[b];
    uni += be.uniform3[b];
    per_rot.push_back(be.rotated[b] / static_cast<double>(n));
    per_norot.push_back(be.unrotated[b] / static_cast<double>(n));
    per_uni.push_back(be.uniform3[b] / static_cast<double>(n));
  }

  const double coeffs = nb * static_cast<double>(n);
  r.linf_in /= nb;
  r.linf_rot /= nb;
  r.clamp_fraction = static_cast<double>(clamped) / coeffs;
  r.zero_fraction = static_cast<double>(zeros) / coeffs;
  r.bound_slack = r.unclamped_blocks > 0 ? slack : 0.0;
  r.norot_mse = norot / coeffs;
  r.uniform3_mse = uni / coeffs;
  r.median_block_mse = median(std::move(per_rot));
  r.median_block_mse_norot = median(std::move(per_norot));
  r.median_block_mse_uniform3 = median(std::move(per_uni));
  return r;
}

ErrorReport eval_error(const codec::WeightTensor &w, const codec::QuantConfig &cfg) {
  return eval_error(w, codec::quantize_tensor(w, cfg), cfg.policy);
}

std::vector<AblationRow> ablate_block_size(const synth::GeneratorSpec &gen,
                                           std::span<const std::size_t> sweep,
                                           const codec::QuantConfig &base) {
  const codec::WeightTensor w = synth::generate(gen);
  std::vector<AblationRow> rows;
  for (const std::size_t n : sweep) {
    codec::QuantConfig cfg = base;
    cfg.block_n = n;
    codec::check_config(cfg);
    const codec::QuantizedTensor q = codec::quantize_tensor(w, cfg);
    const BlockErrors be = block_errors(w, q, cfg.policy);
    const codec::WeightTensor recon = codec::dequantize_tensor(q);

    AblationRow row;
    row.block_n = n;
    double err2 = 0.0;
    for (std::size_t i = 0; i < w.values.size(); ++i) {
      const double e = static_cast<double>(recon.values[i]) - static_cast<double>(w.values[i]);
      err2 += e * e;
    }
    row.mse = err2 / static_cast<double>(w.values.size());
    std::vector<double> per;
    per.reserve(be.rotated.size());
    for (const double e : be.rotated)
      per.push_back(e / static_cast<double>(n));
    row.median_block_mse = median(std::move(per));
    row.relative_overhead = std::log2(static_cast<double>(n)) + 1.0;
    rows.push_back(row);
  }
  return rows;
}

} // namespace itq3::compute
