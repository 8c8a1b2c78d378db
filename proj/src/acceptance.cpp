#include "itq3/acceptance.hpp"

#include "itq3/codec.hpp"
#include "itq3/compute.hpp"
#include "itq3/container.hpp"
#include "itq3/error.hpp"
#include "itq3/f16.hpp"
#include "itq3/packing.hpp"
#include "itq3/quantizer.hpp"
#include "itq3/synthetic.hpp"
#include "itq3/transform.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <random>
#include <sstream>

namespace itq3::acceptance {

namespace {

using Rng = std::mt19937_64;

std::vector<float> gaussian_vector(Rng &rng, std::size_t n, double sigma = 1.0) {
  std::normal_distribution<double> g(0.0, sigma);
  std::vector<float> v(n);
  for (float &x : v)
    x = static_cast<float>(g(rng));
  return v;
}

// Mixed suite for block-level checks: Gaussian, Laplace, Student-t(3) and
// Gaussian with 1% x20 outliers, rotating through the four.
std::vector<float> suite_block(std::size_t index, std::size_t n, std::uint64_t seed) {
  synth::GeneratorSpec spec;
  spec.rows = 1;
  spec.cols = n;
  spec.seed = seed + index * 7919;
  static constexpr std::array kDists = {synth::Distribution::Gaussian, synth::Distribution::Laplace,
                                        synth::Distribution::StudentT, synth::Distribution::Outlier};
  spec.dist = kDists[index % kDists.size()];
  std::vector<float> v(n);
  synth::fill(spec, v);
  return v;
}

double l2(std::span<const float> v) {
  double s = 0.0;
  for (const float x : v)
    s += static_cast<double>(x) * static_cast<double>(x);
  return std::sqrt(s);
}

double dist2(std::span<const float> a, std::span<const float> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double e = static_cast<double>(a[i]) - static_cast<double>(b[i]);
    s += e * e;
  }
  return s;
}

std::string fmt(const char *f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

CheckResult transform_oracle(const Options &o) {
  Rng rng(o.seed + 1);
  double worst = 0.0;
  for (std::size_t n = 2; n <= 64; n <<= 1) {
    for (int t = 0; t < 100; ++t) {
      const std::vector<float> v = gaussian_vector(rng, n);
      const std::vector<double> vd(v.begin(), v.end());
      const std::vector<float> fast = transform::fwht_forward(v);
      const std::vector<double> ref = transform::hadamard_oracle(vd);
      for (std::size_t i = 0; i < n; ++i)
        worst = std::max(worst, std::abs(static_cast<double>(fast[i]) - ref[i]));
    }
  }
  return {1, "", worst <= 1e-6, fmt("max abs err %.3e over n=2..64 x100 (tol 1e-6)", worst)};
}

CheckResult involution_isometry(const Options &o) {
  Rng rng(o.seed + 2);
  double worst_inv = 0.0;
  double worst_iso = 0.0;
  for (std::size_t n = 32; n <= 512; n <<= 1) {
    for (int t = 0; t < 1000; ++t) {
      const std::vector<float> v = gaussian_vector(rng, n);
      const std::vector<float> h = transform::fwht_forward(v);
      const std::vector<float> back = transform::fwht_inverse(h);
      double vinf = 0.0;
      double err = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        vinf = std::max(vinf, static_cast<double>(std::abs(v[i])));
        err = std::max(err, std::abs(static_cast<double>(back[i]) - v[i]));
      }
      worst_inv = std::max(worst_inv, err / vinf);
      worst_iso = std::max(worst_iso, std::abs(l2(h) - l2(v)) / l2(v));
    }
  }
  const bool ok = worst_inv <= 1e-5 && worst_iso <= 1e-5;
  return {2, "", ok,
          fmt("round trip %.3e*|v|inf, norm drift %.3e*|v|2 (tol 1e-5 each)", worst_inv,
              worst_iso)};
}

CheckResult outlier_bound(const Options &o) {
  constexpr std::size_t n = 256;
  std::size_t violations = 0;
  double tightest = 1e300;
  for (std::size_t i = 0; i < 10000; ++i) {
    const std::vector<float> w = suite_block(i, n, o.seed + 3);
    const std::vector<float> h = transform::fwht_forward(w);
    double l1 = 0.0;
    for (const float x : w)
      l1 += std::abs(static_cast<double>(x));
    const double bound = l1 / std::sqrt(static_cast<double>(n));
    double hinf = 0.0;
    for (const float x : h)
      hinf = std::max(hinf, static_cast<double>(std::abs(x)));
    if (hinf > bound)
      ++violations;
    tightest = std::min(tightest, bound - hinf);
  }
  return {3, "", violations == 0,
          fmt("%zu violations in 10^4 blocks, min slack %.3e", violations, tightest)};
}

CheckResult impulse_spreading(const Options &o) {
  constexpr std::size_t n = 256;
  Rng rng(o.seed + 4);
  std::uniform_real_distribution<double> mag(0.5, 1000.0);
  std::uniform_int_distribution<std::size_t> pos(0, n - 1);
  double worst = 0.0;
  for (int t = 0; t < 200; ++t) {
    const double m = t == 0 ? 16.0 : mag(rng);
    std::vector<float> w(n, 0.0f);
    w[t == 0 ? 5 : pos(rng)] = static_cast<float>(m);
    const std::vector<float> h = transform::fwht_forward(w);
    const double expect = static_cast<float>(m) / 16.0;
    for (const float x : h)
      worst = std::max(worst, std::abs(std::abs(static_cast<double>(x)) - expect) / m);
  }
  return {4, "", worst <= 1e-6, fmt("max ||c| - M/16| = %.3e*M (tol 1e-6*M)", worst)};
}

CheckResult smoothing(const Options &o) {
  constexpr std::size_t n = 256;
  synth::GeneratorSpec spec;
  spec.dist = synth::Distribution::Laplace;
  spec.rows = 10000;
  spec.cols = n;
  spec.seed = o.seed + 5;
  const codec::Matrix w = synth::generate(spec);

  std::vector<float> pooled;
  pooled.reserve(w.values.size());
  std::vector<float> block(n);
  for (std::size_t b = 0; b < spec.rows; ++b) {
    std::copy_n(w.values.begin() + static_cast<std::ptrdiff_t>(b * n), n, block.begin());
    transform::fwht_inplace(block);
    pooled.insert(pooled.end(), block.begin(), block.end());
  }
  const double k_in = quant::block_stats(w.values).excess_kurtosis;
  const double k_out = quant::block_stats(pooled).excess_kurtosis;
  const bool ok = k_out >= -0.3 && k_out <= 0.3;
  return {5, "", ok,
          fmt("excess kurtosis %.4f -> %.4f over 10^4 Laplace blocks (band [-0.3, 0.3])", k_in,
              k_out)};
}

struct TransferStats {
  double worst_rel = 0.0;
  std::size_t unclamped = 0;
  std::size_t violations = 0;
  double min_slack = 1e300;
};

void measure_block(std::span<const float> w, const codec::QuantConfig &cfg, TransferStats &s) {
  const codec::BlockEncoding enc = codec::encode_block_detailed(w, cfg);
  const std::vector<float> recon = codec::decode_block(enc.block);
  const pack::BlockScales scales = pack::decode_scales(enc.block);
  const std::vector<float> deq =
      codec::dequantize_coefficients(enc.ternary.codes, scales, cfg.variant);

  const double recon_err = std::sqrt(dist2(recon, w));
  const double tdom_err = std::sqrt(dist2(deq, enc.coeffs));
  const double rel = tdom_err > 0.0 ? std::abs(recon_err - tdom_err) / tdom_err : recon_err;
  s.worst_rel = std::max(s.worst_rel, rel);

  if (enc.ternary.clamped == 0) {
    ++s.unclamped;
    double bound = 0.0;
    for (const double d : enc.ternary.steps)
      bound += d * d / 4.0;
    const double err2 = recon_err * recon_err;
    if (err2 > bound + 1e-6)
      ++s.violations;
    s.min_slack = std::min(s.min_slack, bound - err2);
  }
}

CheckResult error_transfer(const Options &o) {
  TransferStats s;
  codec::QuantConfig cfg;
  for (std::size_t i = 0; i < 1000; ++i) {
    cfg.variant = i % 2 == 0 ? pack::Variant::S : pack::Variant::SS;
    measure_block(suite_block(i, cfg.block_n, o.seed + 6), cfg, s);
  }
  return {6, "", s.worst_rel <= 1e-4,
          fmt("max relative gap %.3e over 10^3 blocks (tol 1e-4)", s.worst_rel)};
}

CheckResult bound_check(const Options &o) {
  // The default step clamps most Gaussian blocks, so the bound is also
  // exercised with wider steps and with impulses, which never clamp.
  TransferStats s;
  constexpr std::size_t n = 256;
  const std::array<double, 4> constants = {quant::kDefaultScaleConstant, 1.5, 2.0, 3.0};
  std::size_t index = 0;
  for (const double c : constants) {
    codec::QuantConfig cfg;
    cfg.policy.constant = c;
    for (int t = 0; t < 500; ++t, ++index) {
      cfg.variant = t % 2 == 0 ? pack::Variant::S : pack::Variant::SS;
      measure_block(suite_block(index, n, o.seed + 7), cfg, s);
    }
  }
  Rng rng(o.seed + 70);
  std::uniform_int_distribution<std::size_t> pos(1, n - 1);
  std::uniform_real_distribution<double> mag(0.1, 100.0);
  for (int t = 0; t < 500; ++t) {
    std::vector<float> w(n, 0.0f);
    w[pos(rng)] = static_cast<float>(t == 0 ? 16.0 : mag(rng));
    measure_block(w, codec::QuantConfig{}, s);
  }
  const bool ok = s.violations == 0 && s.unclamped >= 100;
  return {7, "", ok,
          fmt("%zu violations on %zu unclamped blocks, min slack %.3e", s.violations,
              s.unclamped, s.min_slack)};
}

CheckResult scale_oracle(const Options &o) {
  const double t_num = quant::numeric_argmin_scale();
  // Verification grid centred on the published 0.798 constant.
  const std::array<double, 5> grid = {0.6, 0.7, 0.8, 0.9, 1.0};
  std::vector<double> mc;
  const double t_mc = monte_carlo_minimizer(10'000'000, grid, o.seed + 8, &mc);
  double worst_mse = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i)
    worst_mse = std::max(worst_mse, std::abs(mc[i] - quant::ternary_mse(grid[i], 1.0)));
  const double closed = quant::erfinv_closed_form_scale();
  const bool ok = std::abs(t_num - t_mc) <= 0.02;
  std::string note = std::abs(t_num - quant::kDefaultScaleConstant) > 0.02
                         ? " [info: grid minimizer differs from 0.7979]"
                         : "";
  if (std::abs(closed - quant::kDefaultScaleConstant) > 0.02)
    note += " [info: sqrt(2)*erfinv(2/3) differs from 0.7979]";
  return {8, "", ok,
          fmt("grid t=%.3f, MC t=%.4f (tol 0.02); MC mse gap %.1e; constant 0.7979, "
              "sqrt(2)*erfinv(2/3)=%.4f",
              t_num, t_mc, worst_mse, closed) +
              note};
}

CheckResult packing(const Options &o) {
  std::size_t failures = 0;
  std::array<std::int8_t, 8> codes{};
  for (int k = 0; k < 6561; ++k) {
    int r = k;
    for (auto &c : codes) {
      c = static_cast<std::int8_t>(r % 3 - 1);
      r /= 3;
    }
    const auto bytes = pack::pack_ternary(codes);
    const auto back = pack::unpack_ternary(bytes, codes.size());
    if (bytes.size() != 3 || !std::equal(back.begin(), back.end(), codes.begin()))
      ++failures;
  }

  Rng rng(o.seed + 9);
  std::uniform_int_distribution<int> pick(-1, 1);
  std::vector<std::int8_t> big(256);
  for (int t = 0; t < 10000; ++t) {
    for (auto &c : big)
      c = static_cast<std::int8_t>(pick(rng));
    const auto bytes = pack::pack_ternary(big);
    if (bytes.size() != 96 || pack::unpack_ternary(bytes, 256) != big)
      ++failures;
  }

  const std::array<double, 8> subs = {0.5, 0.5, 0.5, 0.5, 0.5, 0.5, 0.5, 0.5};
  const std::size_t s_size = pack::serialize_block(big, {0.5, 0}).size();
  const std::size_t ss_size =
      pack::serialize_block(big, {0.5, 0}, std::span<const double>(subs)).size();
  const bool ok = failures == 0 && s_size == 100 && ss_size == 116;
  return {9, "", ok,
          fmt("%zu failures (6561 exhaustive n=8, 10^4 random n=256); block bytes S=%zu "
              "SS=%zu (3.125 / 3.625 bpw)",
              failures, s_size, ss_size)};
}

CheckResult f16_sweep(const Options &) {
  std::size_t failures = 0;
  for (std::uint32_t bits = 0; bits <= 0xFFFF; ++bits) {
    const auto h = static_cast<std::uint16_t>(bits);
    const std::uint16_t again = f16::encode(f16::decode(h));
    const bool ok = f16::is_nan(h) ? again == f16::kCanonicalNaN : again == h;
    if (!ok)
      ++failures;
  }
  return {10, "", failures == 0, fmt("%zu of 65536 patterns failed the round trip", failures)};
}

CheckResult rotation_benefit(const Options &o) {
  synth::GeneratorSpec spec;
  spec.dist = synth::Distribution::Outlier;
  spec.rows = 256;
  spec.cols = 1024; // 1024 blocks of 256
  spec.seed = o.seed + 11;
  const codec::Matrix w = synth::generate(spec);
  const compute::ErrorReport r = compute::eval_error(w, codec::QuantConfig{});
  const bool ok = r.median_block_mse < r.median_block_mse_norot &&
                  r.median_block_mse < r.median_block_mse_uniform3;
  return {11, "", ok,
          fmt("median block MSE rotated %.4f, unrotated %.4f (ratio %.3f), uniform 3-bit "
              "%.4f (ratio %.3f) over %zu blocks",
              r.median_block_mse, r.median_block_mse_norot,
              r.median_block_mse / r.median_block_mse_norot, r.median_block_mse_uniform3,
              r.median_block_mse / r.median_block_mse_uniform3, r.blocks)};
}

CheckResult ablation_trend(const Options &o) {
  synth::GeneratorSpec spec;
  spec.dist = synth::Distribution::Outlier;
  spec.rows = 256;
  spec.cols = 1024;
  spec.seed = o.seed + 12;
  const std::array<std::size_t, 4> sweep = {32, 64, 128, 256};
  const auto rows = compute::ablate_block_size(spec, sweep, codec::QuantConfig{});
  bool ok = true;
  std::ostringstream detail;
  detail << "median block MSE";
  for (std::size_t i = 0; i < rows.size(); ++i) {
    detail << (i ? " -> " : " ") << fmt("%zu:%.4f", rows[i].block_n, rows[i].median_block_mse);
    if (i > 0 && rows[i].median_block_mse > rows[i - 1].median_block_mse)
      ok = false;
  }
  detail << " (must be non-increasing)";
  return {12, "", ok, detail.str()};
}

CheckResult fused_equivalence(const Options &o) {
  struct Shape {
    std::size_t rows, cols, k, block;
  };
  const std::array<Shape, 8> shapes = {{{1, 32, 1, 32},
                                         {3, 100, 2, 64},
                                         {8, 512, 1, 256},
                                         {17, 300, 5, 128},
                                         {5, 777, 3, 512},
                                         {64, 4096, 1, 256},
                                         {64, 4096, 4, 256},
                                         {32, 1000, 7, 256}}};
  Rng rng(o.seed + 13);
  double worst = 0.0;
  bool consistent = true;
  for (std::size_t s = 0; s < shapes.size(); ++s) {
    const Shape sh = shapes[s];
    synth::GeneratorSpec spec;
    spec.dist = s % 2 ? synth::Distribution::Outlier : synth::Distribution::Gaussian;
    spec.rows = sh.rows;
    spec.cols = sh.cols;
    spec.seed = o.seed + 130 + s;
    codec::QuantConfig cfg;
    cfg.block_n = sh.block;
    cfg.variant = s % 3 == 0 ? pack::Variant::SS : pack::Variant::S;
    const codec::QuantizedTensor q = codec::quantize_tensor(synth::generate(spec), cfg);

    codec::Matrix x(sh.cols, sh.k, gaussian_vector(rng, sh.cols * sh.k));
    const codec::Matrix ref = compute::dense_matmul(codec::dequantize_tensor(q), x);
    const codec::Matrix got = compute::fused_matmul(q, x);
    for (std::size_t i = 0; i < ref.values.size(); ++i) {
      const double a = got.values[i];
      const double b = ref.values[i];
      worst = std::max(worst, std::abs(a - b) / std::max(std::abs(b), 1e-30));
    }
    if (sh.k == 1) {
      const std::vector<float> mv = compute::fused_matvec(q, x.values);
      consistent = consistent && mv == got.values;
    }
  }
  const bool ok = worst <= 1e-5 && consistent;
  return {13, "", ok,
          fmt("max per-element relative gap %.3e (tol 1e-5); matvec == matmul(k=1): %s", worst,
              consistent ? "yes" : "no")};
}

CheckResult container_round_trip(const Options &o) {
  Rng rng(o.seed + 14);
  std::uniform_int_distribution<std::size_t> dim(1, 300);
  const std::array<std::size_t, 5> sizes = {32, 64, 128, 256, 512};
  std::size_t failures = 0;
  std::size_t partial = 0;
  for (int t = 0; t < 100; ++t) {
    synth::GeneratorSpec spec;
    spec.dist = static_cast<synth::Distribution>(t % 4);
    spec.rows = dim(rng);
    spec.cols = dim(rng);
    spec.seed = o.seed + 1400 + static_cast<std::uint64_t>(t);
    codec::QuantConfig cfg;
    cfg.block_n = sizes[static_cast<std::size_t>(t) % sizes.size()];
    cfg.variant = t % 2 ? pack::Variant::SS : pack::Variant::S;
    cfg.symmetric = t % 3 != 0;
    const codec::QuantizedTensor q = codec::quantize_tensor(synth::generate(spec), cfg);
    if (q.pad > 0)
      ++partial;

    std::stringstream first;
    container::write_container(q, first);
    const std::string bytes = first.str();
    std::stringstream in(bytes);
    const codec::QuantizedTensor back = container::read_container(in);
    std::stringstream second;
    container::write_container(back, second);
    if (!(back == q) || second.str() != bytes)
      ++failures;
  }
  return {14, "", failures == 0,
          fmt("%zu of 100 tensors differ after write/read (%zu with partial final block)",
              failures, partial)};
}

} // namespace

double monte_carlo_minimizer(std::size_t samples, std::span<const double> grid,
                             std::uint64_t seed, std::vector<double> *mse_out) {
  std::vector<double> sum(grid.size(), 0.0);
  Rng rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  for (std::size_t i = 0; i < samples; ++i) {
    const double x = g(rng);
    const double ax = std::abs(x);
    for (std::size_t k = 0; k < grid.size(); ++k) {
      const double e = ax > grid[k] ? ax - grid[k] : ax;
      sum[k] += e * e;
    }
  }
  std::vector<double> mse(grid.size());
  for (std::size_t k = 0; k < grid.size(); ++k)
    mse[k] = sum[k] / static_cast<double>(samples);

  // Least-squares parabola m = a + b t + c t^2 through the grid values.
  double s[5] = {0, 0, 0, 0, 0};
  double r[3] = {0, 0, 0};
  for (std::size_t k = 0; k < grid.size(); ++k) {
    double p = 1.0;
    for (int e = 0; e < 5; ++e, p *= grid[k])
      s[e] += p;
    r[0] += mse[k];
    r[1] += mse[k] * grid[k];
    r[2] += mse[k] * grid[k] * grid[k];
  }
  const double m[3][3] = {{s[0], s[1], s[2]}, {s[1], s[2], s[3]}, {s[2], s[3], s[4]}};
  const auto det3 = [](const double a[3][3]) {
    return a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1]) -
           a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0]) +
           a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0]);
  };
  const double det = det3(m);
  double coef[3];
  for (int c = 0; c < 3; ++c) {
    double mc[3][3];
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        mc[i][j] = j == c ? r[i] : m[i][j];
    coef[c] = det3(mc) / det;
  }
  if (mse_out)
    *mse_out = mse;
  return -coef[1] / (2.0 * coef[2]);
}

std::vector<int> all_criteria() {
  std::vector<int> ids(kCriterionCount);
  std::iota(ids.begin(), ids.end(), 1);
  return ids;
}

std::string criterion_name(int id) {
  switch (id) {
  case 1: return "transform oracle equivalence";
  case 2: return "involution and isometry";
  case 3: return "deterministic outlier bound";
  case 4: return "impulse spreading";
  case 5: return "smoothing proxy";
  case 6: return "error-transfer equality";
  case 7: return "reconstruction bound";
  case 8: return "scale oracle";
  case 9: return "packing bijection and block sizes";
  case 10: return "binary16 round trip";
  case 11: return "rotation benefit";
  case 12: return "block size ablation trend";
  case 13: return "fused-path equivalence";
  case 14: return "container round trip";
  }
  return "unknown";
}

CheckResult run_criterion(int id, const Options &opts) {
  CheckResult r;
  try {
    switch (id) {
    case 1: r = transform_oracle(opts); break;
    case 2: r = involution_isometry(opts); break;
    case 3: r = outlier_bound(opts); break;
    case 4: r = impulse_spreading(opts); break;
    case 5: r = smoothing(opts); break;
    case 6: r = error_transfer(opts); break;
    case 7: r = bound_check(opts); break;
    case 8: r = scale_oracle(opts); break;
    case 9: r = packing(opts); break;
    case 10: r = f16_sweep(opts); break;
    case 11: r = rotation_benefit(opts); break;
    case 12: r = ablation_trend(opts); break;
    case 13: r = fused_equivalence(opts); break;
    case 14: r = container_round_trip(opts); break;
    default:
      throw Error(ErrorKind::Usage, "no acceptance criterion " + std::to_string(id));
    }
  } catch (const Error &e) {
    if (e.kind() == ErrorKind::Usage)
      throw;
    r = {id, "", false, std::string("threw ") + std::string(e.id()) + ": " + e.what()};
  }
  r.id = id;
  r.name = criterion_name(id);
  return r;
}

std::vector<CheckResult> run(std::span<const int> ids, const Options &opts) {
  std::vector<CheckResult> out;
  for (const int id : ids)
    out.push_back(run_criterion(id, opts));
  return out;
}

std::string format(const CheckResult &r) {
  return fmt("%s  %02d %s: ", r.passed ? "PASS" : "FAIL", r.id, r.name.c_str()) + r.detail;
}

} // namespace itq3::acceptance
