#pragma once

#include "itq3/codec.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>

namespace itq3::synth {

enum class Distribution { Gaussian, Laplace, StudentT, Outlier };

std::optional<Distribution> parse_distribution(std::string_view name);
std::string_view distribution_name(Distribution d);

struct GeneratorSpec {
  Distribution dist = Distribution::Gaussian;
  std::size_t rows = 64;
  std::size_t cols = 4096;
  std::uint64_t seed = 0;
  double sigma = 1.0;          // Gaussian / Laplace std, Student-t scale
  double nu = 3.0;             // Student-t degrees of freedom
  double outlier_frac = 0.01;  // Outlier: per-weight injection probability
  double outlier_mult = 20.0;  // Outlier: injected weights are multiplied by this
};

// Laplace is scaled to standard deviation sigma. Outlier draws N(0, sigma^2)
// and multiplies each weight by outlier_mult with probability outlier_frac.
codec::Matrix generate(const GeneratorSpec &spec);

// Same stream as generate() for a flat buffer.
void fill(const GeneratorSpec &spec, std::span<float> out);

} // namespace itq3::synth
