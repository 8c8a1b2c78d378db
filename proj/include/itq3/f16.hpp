#pragma once

#include <cstdint>

namespace itq3::f16 {

inline constexpr std::uint16_t kCanonicalNaN = 0x7E00;
inline constexpr std::uint16_t kMaxFinite = 0x7BFF; // 65504
inline constexpr std::uint16_t kMinSubnormal = 0x0001; // 2^-24

// IEEE 754 binary16, round to nearest even. Finite values beyond the
// largest half saturate to +/-65504; +/-inf passes through; NaN becomes
// the canonical quiet NaN.
std::uint16_t encode(double x) noexcept;

// Exact for every pattern; NaN payloads are not preserved.
double decode(std::uint16_t bits) noexcept;

bool is_nan(std::uint16_t bits) noexcept;

// decode(encode(x)) without the round trip through bits.
inline double round_to_half(double x) noexcept { return decode(encode(x)); }

} // namespace itq3::f16
