#include "itq3/quantizer.hpp"

#include "itq3/error.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/erf.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

namespace itq3::quant {

namespace {

template <typename T> BlockStats stats_impl(std::span<const T> v) {
  if (v.empty())
    throw Error(ErrorKind::Domain, "block_stats on an empty block");

  BlockStats s;
  s.count = v.size();
  const double n = static_cast<double>(v.size());

  double sum = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double x = v[i];
    if (!std::isfinite(x)) {
      throw Error(ErrorKind::Domain,
                  "non-finite block value at index " + std::to_string(i));
    }
    sum += x;
    s.l1 += std::abs(x);
    s.linf = std::max(s.linf, std::abs(x));
  }
  s.mean = sum / n;

  double m2 = 0.0;
  double m4 = 0.0;
  for (const T xv : v) {
    const double dx = static_cast<double>(xv) - s.mean;
    const double sq = dx * dx;
    m2 += sq;
    m4 += sq * sq;
  }
  m2 /= n;
  m4 /= n;
  s.sigma = std::sqrt(m2);
  s.excess_kurtosis = m2 > 0.0 ? m4 / (m2 * m2) - 3.0 : 0.0;
  return s;
}

double gaussian_pdf(double x, double sigma) {
  const double u = x / sigma;
  return std::exp(-0.5 * u * u) / (sigma * std::sqrt(2.0 * std::numbers::pi));
}

} // namespace

BlockStats block_stats(std::span<const float> v) { return stats_impl(v); }
BlockStats block_stats(std::span<const double> v) { return stats_impl(v); }

double ternary_mse(double alpha, double sigma) {
  if (!(alpha > 0.0) || !std::isfinite(alpha) || !(sigma > 0.0) ||
      !std::isfinite(sigma)) {
    throw Error(ErrorKind::Domain, "ternary_mse needs positive finite alpha and sigma");
  }
  using Quad = boost::math::quadrature::gauss_kronrod<double, 61>;
  constexpr unsigned kMaxDepth = 20;
  constexpr double kRelTol = 1e-13;

  const auto tail = [&](double x) {
    const double e = x - alpha;
    return e * e * gaussian_pdf(x, sigma);
  };
  const auto inner = [&](double x) { return x * x * gaussian_pdf(x, sigma); };

  const double tail_part =
      Quad::integrate(tail, alpha, std::numeric_limits<double>::infinity(),
                      kMaxDepth, kRelTol);
  const double inner_part = Quad::integrate(inner, 0.0, alpha, kMaxDepth, kRelTol);
  return 2.0 * tail_part + 2.0 * inner_part;
}

double numeric_argmin_scale() {
  static const double t_num = [] {
    constexpr int kSteps = 2000; // alpha = k * 1e-3, k = 1..2000
    double best_alpha = 0.0;
    double best_mse = std::numeric_limits<double>::infinity();
    for (int k = 1; k <= kSteps; ++k) {
      const double alpha = k * 1e-3;
      const double mse = ternary_mse(alpha, 1.0);
      if (mse < best_mse) {
        best_mse = mse;
        best_alpha = alpha;
      }
    }
    return best_alpha;
  }();
  return t_num;
}

double erfinv_closed_form_scale() {
  return std::numbers::sqrt2 * boost::math::erf_inv(2.0 / 3.0);
}

double optimal_scale(const BlockStats &stats, const ScalePolicy &policy,
                     double floor) {
  double d = 0.0;
  switch (policy.kind) {
  case ScaleKind::FixedConstant:
    d = policy.constant * stats.sigma;
    break;
  case ScaleKind::NumericArgmin:
    d = numeric_argmin_scale() * stats.sigma;
    break;
  case ScaleKind::MeanAbs:
    d = stats.count > 0
            ? (2.0 / 3.0) * (stats.l1 / static_cast<double>(stats.count))
            : 0.0;
    break;
  }
  return d > floor ? d : floor;
}

void check_grid(const TernaryGrid &grid) {
  if (!(grid.d > 0.0) || !std::isfinite(grid.d))
    throw Error(ErrorKind::Domain, "ternary scale must be positive and finite");
  if (grid.z < -1 || grid.z > 1)
    throw Error(ErrorKind::Domain, "ternary zero-point must be in {-1, 0, 1}");
}

int ternary_quantize_raw(double x, const TernaryGrid &grid) {
  check_grid(grid);
  if (!std::isfinite(x))
    throw Error(ErrorKind::Domain, "cannot quantize a non-finite value");
  // std::round rounds half away from zero. Saturate before the integer cast
  // so tiny steps cannot overflow.
  const double r = std::clamp(std::round(x / grid.d), -4.0, 4.0);
  return static_cast<int>(r) + grid.z;
}

int ternary_quantize(double x, const TernaryGrid &grid) {
  return std::clamp(ternary_quantize_raw(x, grid), -1, 1);
}

double ternary_dequantize(int code, const TernaryGrid &grid) {
  check_grid(grid);
  if (code < -1 || code > 1)
    throw Error(ErrorKind::Domain, "ternary code out of range: " + std::to_string(code));
  return grid.d * static_cast<double>(code - grid.z);
}

double uniform_quantize(double x, int bits, double wmin, double wmax) {
  if (bits < 2 || bits > 8)
    throw Error(ErrorKind::Domain, "uniform quantizer bits must be in [2, 8]");
  if (!(wmin < wmax))
    throw Error(ErrorKind::Domain, "uniform quantizer needs wmin < wmax");
  if (!std::isfinite(x))
    throw Error(ErrorKind::Domain, "cannot quantize a non-finite value");
  const double delta = (wmax - wmin) / static_cast<double>((1 << bits) - 1);
  return std::clamp(delta * std::floor(x / delta + 0.5), wmin, wmax);
}

} // namespace itq3::quant
