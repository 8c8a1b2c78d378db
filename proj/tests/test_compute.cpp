#include "itq3/codec.hpp"
#include "itq3/compute.hpp"
#include "itq3/error.hpp"
#include "itq3/quantizer.hpp"
#include "itq3/report.hpp"
#include "itq3/synthetic.hpp"

#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

using namespace itq3;

namespace {

codec::Matrix random_matrix(std::size_t r, std::size_t c, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<float> g(0.0f, 1.0f);
  codec::Matrix m(r, c);
  for (float &x : m.values)
    x = g(rng);
  return m;
}

synth::GeneratorSpec suite(synth::Distribution d) {
  synth::GeneratorSpec s;
  s.dist = d;
  s.rows = 64;
  s.cols = 2048;
  s.seed = 7;
  return s;
}

} // namespace

TEST_CASE("fused matvec equals a naive product with the decoded tensor") {
  for (std::size_t block : {32u, 256u}) {
    const auto w = random_matrix(7, 300, 51);
    codec::QuantConfig cfg;
    cfg.block_n = block;
    const auto q = codec::quantize_tensor(w, cfg);
    const auto wd = codec::dequantize_tensor(q);
    const auto x = random_matrix(300, 1, 52).values;
    const auto y = compute::fused_matvec(q, x);
    REQUIRE(y.size() == 7);
    for (std::size_t r = 0; r < 7; ++r) {
      double acc = 0.0;
      for (std::size_t c = 0; c < 300; ++c)
        acc += double(wd(r, c)) * double(x[c]);
      CHECK(y[r] == static_cast<float>(acc));
    }
  }
}

TEST_CASE("fused matmul equals dense matmul and repeated matvec") {
  const auto w = random_matrix(9, 130, 53);
  codec::QuantConfig cfg;
  cfg.block_n = 64;
  cfg.variant = pack::Variant::SS;
  const auto q = codec::quantize_tensor(w, cfg);
  const auto x = random_matrix(130, 5, 54);
  const auto fused = compute::fused_matmul(q, x);
  const auto dense = compute::dense_matmul(codec::dequantize_tensor(q), x);
  CHECK(fused == dense);
  for (std::size_t k = 0; k < 5; ++k) {
    std::vector<float> col(130);
    for (std::size_t c = 0; c < 130; ++c)
      col[c] = x(c, k);
    const auto y = compute::fused_matvec(q, col);
    for (std::size_t r = 0; r < 9; ++r)
      CHECK(y[r] == fused(r, k));
  }
}

TEST_CASE("matvec shape errors") {
  const auto q = codec::quantize_tensor(random_matrix(2, 32, 55), {});
  std::vector<float> x(31, 1.0f);
  try {
    compute::fused_matvec(q, x);
    FAIL("expected shape error");
  } catch (const Error &e) {
    CHECK(e.kind() == ErrorKind::Shape);
  }
  CHECK_THROWS_AS(compute::fused_matmul(q, codec::Matrix(31, 2)), Error);
}

TEST_CASE("error report agrees with a direct computation") {
  const auto w = random_matrix(4, 512, 56);
  codec::QuantConfig cfg;
  const auto q = codec::quantize_tensor(w, cfg);
  const auto r = compute::eval_error(w, q, cfg.policy);
  const auto back = codec::dequantize_tensor(q);
  double err = 0.0, ref = 0.0;
  for (std::size_t i = 0; i < w.values.size(); ++i) {
    err += std::pow(double(back.values[i]) - w.values[i], 2);
    ref += std::pow(double(w.values[i]), 2);
  }
  CHECK(r.mse == doctest::Approx(err / 2048.0).epsilon(1e-9));
  CHECK(r.frobenius_rel == doctest::Approx(std::sqrt(err / ref)).epsilon(1e-9));
  CHECK(r.blocks == 8);
  CHECK(r.transfer_max_rel < 1e-4);
  CHECK(r.zero_fraction > 0.2);
  CHECK(r.zero_fraction < 0.45);
  CHECK(r.bound_violations == 0);
}

TEST_CASE("per-block error respects the half-step bound when unclamped") {
  const auto w = random_matrix(32, 1024, 57);
  const auto q = codec::quantize_tensor(w, {});
  const auto be = compute::block_errors(w, q, {});
  REQUIRE(be.rotated.size() == 128);
  for (std::size_t b = 0; b < be.rotated.size(); ++b) {
    CHECK(std::abs(be.rotated[b] - be.transform_domain[b]) <=
          1e-4 * be.transform_domain[b] + 1e-9);
    if (be.clamped[b] == 0)
      CHECK(be.rotated[b] <= be.bound[b] * (1 + 1e-5));
  }
}

TEST_CASE("rotation lowers median block MSE on heavy-tailed suites") {
  for (auto d : {synth::Distribution::Laplace, synth::Distribution::StudentT,
                 synth::Distribution::Outlier}) {
    const auto r = compute::eval_error(synth::generate(suite(d)), {});
    INFO(synth::distribution_name(d));
    CHECK(r.median_block_mse < r.median_block_mse_norot);
  }
  // Gaussian blocks stay Gaussian after rotation: no benefit, no harm.
  const auto g = compute::eval_error(synth::generate(suite(synth::Distribution::Gaussian)), {});
  CHECK(g.median_block_mse == doctest::Approx(g.median_block_mse_norot).epsilon(0.05));
}

TEST_CASE("rotation flattens the block maximum on outlier data") {
  const auto r = compute::eval_error(synth::generate(suite(synth::Distribution::Outlier)), {});
  CHECK(r.linf_rot < r.linf_in);
}

TEST_CASE("synthetic generators") {
  auto spec = suite(synth::Distribution::Gaussian);
  CHECK(synth::generate(spec) == synth::generate(spec));
  const auto g = synth::generate(spec);
  const auto gs = quant::block_stats(std::span<const float>(g.values));
  CHECK(gs.sigma == doctest::Approx(1.0).epsilon(0.01));
  CHECK(std::abs(gs.excess_kurtosis) < 0.1);

  spec.dist = synth::Distribution::Laplace;
  const auto l = synth::generate(spec);
  const auto ls = quant::block_stats(std::span<const float>(l.values));
  CHECK(ls.sigma == doctest::Approx(1.0).epsilon(0.02));
  CHECK(ls.excess_kurtosis == doctest::Approx(3.0).epsilon(0.15));

  spec.dist = synth::Distribution::Outlier;
  const auto o = synth::generate(spec);
  std::size_t big = 0;
  for (float x : o.values)
    big += std::abs(x) > 8.0f;
  // About 1% of weights scaled by 20, of which ~69% land beyond 8.
  const double expected = 0.01 * 0.689 * double(o.values.size());
  CHECK(double(big) == doctest::Approx(expected).epsilon(0.15));
  spec.outlier_frac = 0.0;
  CHECK(quant::block_stats(std::span<const float>(synth::generate(spec).values)).linf < 7.0);

  CHECK(synth::parse_distribution("student-t") == synth::Distribution::StudentT);
  CHECK_FALSE(synth::parse_distribution("cauchy").has_value());
  CHECK(synth::distribution_name(synth::Distribution::Outlier) == "outlier");
}

TEST_CASE("ablation rows") {
  auto spec = suite(synth::Distribution::Outlier);
  spec.rows = 16;
  const std::vector<std::size_t> sweep{32, 64, 128, 256, 512};
  const auto rows = compute::ablate_block_size(spec, sweep, {});
  REQUIRE(rows.size() == 5);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    CHECK(rows[i].block_n == sweep[i]);
    CHECK(rows[i].relative_overhead == doctest::Approx(std::log2(double(sweep[i])) + 1.0));
    CHECK(rows[i].mse > 0.0);
  }
}

TEST_CASE("report serialization") {
  compute::AblationRow row{64, 0.5, 0.25, 7.0};
  const auto j = report::to_json(row);
  CHECK(j.begin().key() == "block_n");
  CHECK(j["median_block_mse"].get<double>() == 0.25);
  const std::vector<compute::AblationRow> rows{row, row};
  const std::string csv = report::to_csv(std::span<const compute::AblationRow>(rows));
  CHECK(csv == "block_n,mse,median_block_mse,relative_overhead\n64,0.5,0.25,7\n64,0.5,0.25,7\n");
}

TEST_CASE("median") {
  CHECK(compute::median({3.0, 1.0, 2.0}) == 2.0);
  CHECK(compute::median({4.0, 1.0, 2.0, 3.0}) == 2.5);
}
