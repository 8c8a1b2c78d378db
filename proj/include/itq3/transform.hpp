#pragma once

#include <cstddef>
#include <span>
#include <vector>

// Normalized Walsh-Hadamard transform for power-of-two lengths 2..512.
//
// H_n = (1/sqrt(n)) [[H_{n/2}, H_{n/2}], [H_{n/2}, -H_{n/2}]], H_1 = [1].
// Under this normalization H_n is orthonormal and involutory (H_n H_n = I),
// so the forward and inverse transforms are the same computation.

namespace itq3::transform {

inline constexpr std::size_t kMinLength = 2;
inline constexpr std::size_t kMaxLength = 512;
inline constexpr std::size_t kOracleMaxLength = 64;
inline constexpr std::size_t kWarpLength = 32;

bool is_valid_length(std::size_t n) noexcept;

// Validate length and finiteness; throws itq3::Error (Length / Domain).
void check_block(std::span<const float> v);
void check_block(std::span<const double> v);

// In-place butterfly over log2(n) stages followed by a single 1/sqrt(n)
// scale. Arithmetic stays in the element type.
void fwht_inplace(std::span<float> v);
void fwht_inplace(std::span<double> v);

std::vector<float> fwht_forward(std::span<const float> v);
std::vector<double> fwht_forward(std::span<const double> v);

std::vector<float> fwht_inverse(std::span<const float> v);
std::vector<double> fwht_inverse(std::span<const double> v);

// Dense O(n^2) reference: builds H_n recursively and multiplies. Test use
// only; n <= 64 or throws ErrorKind::Size.
std::vector<double> hadamard_oracle(std::span<const double> v);

struct StageTrace {
  // stages[s] is the unnormalized block after butterfly stage s (step 2^s).
  std::vector<std::vector<float>> stages;
  // stages.back() times 1/sqrt(n).
  std::vector<float> normalized;
};

// Stage-by-stage emulation of the shared-memory decode schedule: every
// "thread" j reads slot j and slot j^step of the previous stage and writes
// its own slot of the next one. The reference kernel reads and writes the
// same buffer without a barrier between the write and the following reads;
// double buffering here removes that hazard.
StageTrace fwht_staged(std::span<const float> v);

// 32-point transform in the warp-shuffle formulation: lane j exchanges with
// lane j^step for step = 1..16, then scales by 1/sqrt(32).
std::vector<float> fwht32_warp(std::span<const float> v);

} // namespace itq3::transform
