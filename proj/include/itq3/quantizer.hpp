#pragma once

#include <cstddef>
#include <cstdint>
#include <span>

namespace itq3::quant {

enum class ScaleKind {
  FixedConstant, // d = constant * sigma
  NumericArgmin, // d = t_num * sigma, t_num minimizing ternary_mse(., 1)
  MeanAbs,       // d = (2/3) * mean |x|
};

inline constexpr double kDefaultScaleConstant = 0.7979;
inline constexpr double kScaleFloor = 1e-8;

struct ScalePolicy {
  ScaleKind kind = ScaleKind::FixedConstant;
  double constant = kDefaultScaleConstant;
};

// Population statistics of one block (sigma divides by n).
struct BlockStats {
  std::size_t count = 0;
  double mean = 0.0;
  double sigma = 0.0;
  double l1 = 0.0;
  double linf = 0.0;
  double excess_kurtosis = 0.0; // 0 when sigma == 0
};

struct TernaryGrid {
  double d = 1.0; // step, > 0 and finite
  int z = 0;      // zero-point in {-1, 0, 1}
};

BlockStats block_stats(std::span<const float> v);
BlockStats block_stats(std::span<const double> v);

// MSE of the three-level quantizer with threshold and reconstruction level
// both equal to alpha, for x ~ N(0, sigma^2):
//   2 * int_alpha^inf (x - alpha)^2 phi(x) dx + 2 * int_0^alpha x^2 phi(x) dx
// evaluated by adaptive Gauss-Kronrod quadrature.
double ternary_mse(double alpha, double sigma);

// Grid-search minimizer of ternary_mse(., 1) over (0, 2] with step 1e-3.
// Computed once per process.
double numeric_argmin_scale();

// sqrt(2) * erfinv(2/3): the closed form quoted alongside the 0.7979
// constant. Reported for comparison only.
double erfinv_closed_form_scale();

double optimal_scale(const BlockStats &stats, const ScalePolicy &policy,
                     double floor = kScaleFloor);

void check_grid(const TernaryGrid &grid);

// clamp(round_half_away_from_zero(x / d) + z, -1, 1)
int ternary_quantize(double x, const TernaryGrid &grid);

// Same rounding without the clamp; |raw| > 1 means the value saturates.
int ternary_quantize_raw(double x, const TernaryGrid &grid);

double ternary_dequantize(int code, const TernaryGrid &grid);

// Uniform b-bit baseline: Delta * floor(x / Delta + 1/2), with
// Delta = (wmax - wmin) / (2^bits - 1), clamped to [wmin, wmax].
double uniform_quantize(double x, int bits, double wmin, double wmax);

} // namespace itq3::quant
