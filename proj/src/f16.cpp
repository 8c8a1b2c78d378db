#include "itq3/f16.hpp"

#include <cmath>
#include <limits>

namespace itq3::f16 {

namespace {
// Midpoint between 65504 and 65536; ties go to the even pattern, which is
// infinity, so everything at or above it would overflow.
constexpr double kOverflowThreshold = 65520.0;
constexpr double kMinNormal = 0x1p-14;
} // namespace

std::uint16_t encode(double x) noexcept {
  if (std::isnan(x))
    return kCanonicalNaN;

  const std::uint16_t sign = std::signbit(x) ? 0x8000 : 0x0000;
  const double a = std::fabs(x);

  if (std::isinf(a))
    return sign | 0x7C00;
  if (a >= kOverflowThreshold)
    return sign | kMaxFinite;

  if (a < kMinNormal) {
    // Subnormal: value = m * 2^-24. m == 1024 lands on the smallest normal,
    // whose bit pattern is the same integer.
    const double m = std::nearbyint(a * 0x1p24);
    return sign | static_cast<std::uint16_t>(m);
  }

  int e2 = 0;
  const double frac = std::frexp(a, &e2); // a = frac * 2^e2, frac in [0.5, 1)
  int exponent = e2 - 1;                  // a = (2 * frac) * 2^exponent
  double m = std::nearbyint((2.0 * frac - 1.0) * 1024.0);
  if (m >= 1024.0) {
    m = 0.0;
    ++exponent;
  }
  const auto biased = static_cast<std::uint16_t>(exponent + 15);
  return sign | static_cast<std::uint16_t>(biased << 10) |
         static_cast<std::uint16_t>(m);
}

double decode(std::uint16_t bits) noexcept {
  const bool negative = (bits & 0x8000) != 0;
  const int exponent = (bits >> 10) & 0x1F;
  const int mantissa = bits & 0x3FF;

  double value = 0.0;
  if (exponent == 0) {
    value = std::ldexp(static_cast<double>(mantissa), -24);
  } else if (exponent == 0x1F) {
    if (mantissa != 0)
      return std::numeric_limits<double>::quiet_NaN();
    value = std::numeric_limits<double>::infinity();
  } else {
    value = std::ldexp(static_cast<double>(mantissa + 1024), exponent - 25);
  }
  return negative ? -value : value;
}

bool is_nan(std::uint16_t bits) noexcept {
  return (bits & 0x7C00) == 0x7C00 && (bits & 0x03FF) != 0;
}

} // namespace itq3::f16
