#include "itq3/synthetic.hpp"

#include "itq3/error.hpp"

#include <cmath>
#include <numbers>
#include <random>

namespace itq3::synth {

std::optional<Distribution> parse_distribution(std::string_view name) {
  if (name == "gaussian")
    return Distribution::Gaussian;
  if (name == "laplace")
    return Distribution::Laplace;
  if (name == "student-t")
    return Distribution::StudentT;
  if (name == "outlier")
    return Distribution::Outlier;
  return std::nullopt;
}

std::string_view distribution_name(Distribution d) {
  switch (d) {
  case Distribution::Gaussian: return "gaussian";
  case Distribution::Laplace: return "laplace";
  case Distribution::StudentT: return "student-t";
  case Distribution::Outlier: return "outlier";
  }
  return "unknown";
}

void fill(const GeneratorSpec &spec, std::span<float> out) {
  if (!(spec.sigma > 0.0))
    throw Error(ErrorKind::Domain, "generator sigma must be positive");
  std::mt19937_64 rng(spec.seed);

  switch (spec.dist) {
  case Distribution::Gaussian: {
    std::normal_distribution<double> g(0.0, spec.sigma);
    for (float &x : out)
      x = static_cast<float>(g(rng));
    break;
  }
  case Distribution::Laplace: {
    // |x| ~ Exp(1/b), b = sigma / sqrt(2) gives variance sigma^2.
    std::exponential_distribution<double> e(std::numbers::sqrt2 / spec.sigma);
    std::bernoulli_distribution sign(0.5);
    for (float &x : out) {
      const double mag = e(rng);
      x = static_cast<float>(sign(rng) ? mag : -mag);
    }
    break;
  }
  case Distribution::StudentT: {
    if (!(spec.nu > 0.0))
      throw Error(ErrorKind::Domain, "student-t needs nu > 0");
    std::student_t_distribution<double> t(spec.nu);
    for (float &x : out)
      x = static_cast<float>(spec.sigma * t(rng));
    break;
  }
  case Distribution::Outlier: {
    if (spec.outlier_frac < 0.0 || spec.outlier_frac > 1.0)
      throw Error(ErrorKind::Domain, "outlier fraction must be in [0, 1]");
    std::normal_distribution<double> g(0.0, spec.sigma);
    std::bernoulli_distribution hit(spec.outlier_frac);
    for (float &x : out) {
      double v = g(rng);
      if (hit(rng))
        v *= spec.outlier_mult;
      x = static_cast<float>(v);
    }
    break;
  }
  }
}

codec::Matrix generate(const GeneratorSpec &spec) {
  if (spec.rows == 0 || spec.cols == 0)
    throw Error(ErrorKind::Shape, "generator dimensions must be positive");
  codec::Matrix m(spec.rows, spec.cols);
  fill(spec, m.values);
  return m;
}

} // namespace itq3::synth
