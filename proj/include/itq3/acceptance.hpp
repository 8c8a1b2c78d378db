#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

// Acceptance criteria shared by the acceptance test binary and the CLI
// `selfcheck` command. Each check is self-contained, seeded, and returns a
// one-line verdict with the measured numbers.

namespace itq3::acceptance {

struct CheckResult {
  int id = 0;
  std::string name;
  bool passed = false;
  std::string detail;
};

struct Options {
  std::uint64_t seed = 0x1733ULL;
};

inline constexpr int kCriterionCount = 14;

std::vector<int> all_criteria();
std::string criterion_name(int id);

CheckResult run_criterion(int id, const Options &opts = {});
std::vector<CheckResult> run(std::span<const int> ids, const Options &opts = {});

// "PASS  01 transform oracle equivalence: <detail>"
std::string format(const CheckResult &r);

// Test oracle: minimizer of the empirical three-level MSE (threshold and
// level alpha) over `samples` standard normal draws, from a quadratic fit
// through the five grid points. mse_out receives the empirical MSE values.
double monte_carlo_minimizer(std::size_t samples, std::span<const double> grid,
                             std::uint64_t seed, std::vector<double> *mse_out = nullptr);

} // namespace itq3::acceptance
