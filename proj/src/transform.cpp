#include "itq3/transform.hpp"

#include "itq3/error.hpp"

#include <bit>
#include <cmath>
#include <string>

namespace itq3::transform {

namespace {

template <typename T> T inv_sqrt_length(std::size_t n) {
  return static_cast<T>(1.0 / std::sqrt(static_cast<double>(n)));
}

template <typename T> void check_block_impl(std::span<const T> v) {
  if (!is_valid_length(v.size())) {
    throw Error(ErrorKind::Length,
                "transform length " + std::to_string(v.size()) +
                    " is not a power of two in [2, 512]");
  }
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!std::isfinite(v[i])) {
      throw Error(ErrorKind::Domain,
                  "non-finite transform input at index " + std::to_string(i));
    }
  }
}

template <typename T> void butterfly_stages(std::span<T> v) {
  const std::size_t n = v.size();
  for (std::size_t h = 1; h < n; h <<= 1) {
    for (std::size_t i = 0; i < n; i += h << 1) {
      for (std::size_t j = i; j < i + h; ++j) {
        const T x = v[j];
        const T y = v[j + h];
        v[j] = x + y;
        v[j + h] = x - y;
      }
    }
  }
}

template <typename T> void fwht_inplace_impl(std::span<T> v) {
  check_block_impl<T>(v);
  butterfly_stages(v);
  const T scale = inv_sqrt_length<T>(v.size());
  for (T &x : v)
    x *= scale;
}

template <typename T> std::vector<T> fwht_copy(std::span<const T> v) {
  std::vector<T> out(v.begin(), v.end());
  fwht_inplace_impl<T>(out);
  return out;
}

} // namespace

bool is_valid_length(std::size_t n) noexcept {
  return n >= kMinLength && n <= kMaxLength && std::has_single_bit(n);
}

void check_block(std::span<const float> v) { check_block_impl(v); }
void check_block(std::span<const double> v) { check_block_impl(v); }

void fwht_inplace(std::span<float> v) { fwht_inplace_impl(v); }
void fwht_inplace(std::span<double> v) { fwht_inplace_impl(v); }

std::vector<float> fwht_forward(std::span<const float> v) {
  return fwht_copy(v);
}
std::vector<double> fwht_forward(std::span<const double> v) {
  return fwht_copy(v);
}

std::vector<float> fwht_inverse(std::span<const float> v) {
  return fwht_copy(v);
}
std::vector<double> fwht_inverse(std::span<const double> v) {
  return fwht_copy(v);
}

std::vector<double> hadamard_oracle(std::span<const double> v) {
  if (v.size() > kOracleMaxLength) {
    throw Error(ErrorKind::Size, "dense Hadamard oracle limited to n <= 64, got " +
                                     std::to_string(v.size()));
  }
  check_block_impl(v);

  // Recursive block construction of the unnormalized matrix, then one scale.
  const std::size_t n = v.size();
  std::vector<double> h(n * n, 0.0);
  h[0] = 1.0;
  for (std::size_t m = 1; m < n; m <<= 1) {
    for (std::size_t r = 0; r < m; ++r) {
      for (std::size_t c = 0; c < m; ++c) {
        const double e = h[r * n + c];
        h[r * n + (c + m)] = e;
        h[(r + m) * n + c] = e;
        h[(r + m) * n + (c + m)] = -e;
      }
    }
  }

  const double scale = 1.0 / std::sqrt(static_cast<double>(n));
  std::vector<double> out(n, 0.0);
  for (std::size_t r = 0; r < n; ++r) {
    double acc = 0.0;
    for (std::size_t c = 0; c < n; ++c)
      acc += h[r * n + c] * v[c];
    out[r] = scale * acc;
  }
  return out;
}

StageTrace fwht_staged(std::span<const float> v) {
  check_block_impl(v);
  const std::size_t n = v.size();

  StageTrace trace;
  std::vector<float> prev(v.begin(), v.end());
  std::vector<float> next(n);
  for (std::size_t step = 1; step < n; step <<= 1) {
    for (std::size_t tid = 0; tid < n; ++tid) {
      const float u = prev[tid];
      const float w = prev[tid ^ step];
      next[tid] = (tid & step) ? (w - u) : (u + w);
    }
    trace.stages.push_back(next);
    std::swap(prev, next);
  }

  const float scale = inv_sqrt_length<float>(n);
  trace.normalized = prev;
  for (float &x : trace.normalized)
    x *= scale;
  return trace;
}

std::vector<float> fwht32_warp(std::span<const float> v) {
  if (v.size() != kWarpLength) {
    throw Error(ErrorKind::Length, "warp transform needs exactly 32 lanes, got " +
                                       std::to_string(v.size()));
  }
  check_block_impl(v);

  std::vector<float> lanes(v.begin(), v.end());
  std::vector<float> shuffled(kWarpLength);
  for (std::size_t step = 1; step < kWarpLength; step <<= 1) {
    for (std::size_t lane = 0; lane < kWarpLength; ++lane)
      shuffled[lane] = lanes[lane ^ step];
    // The high lane holds the second operand of the pair, so it computes
    // partner - own.
    for (std::size_t lane = 0; lane < kWarpLength; ++lane) {
      lanes[lane] = (lane & step) ? (shuffled[lane] - lanes[lane])
                                  : (lanes[lane] + shuffled[lane]);
    }
  }

  const float scale = inv_sqrt_length<float>(kWarpLength);
  for (float &x : lanes)
    x *= scale;
  return lanes;
}

} // namespace itq3::transform
