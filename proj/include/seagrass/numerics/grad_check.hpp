#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace seagrass::numerics {

struct GradCheckReport {
  double max_relative_error = 0.0;
  std::size_t worst_index = 0;
  std::size_t probes = 0;
  bool passed = true;
};

/// |a - n| / max(|a|, |n|, 1e-8)
double relative_error(double analytic, double numeric);

using ScalarFunction = std::function<double(std::span<const double>)>;

/// Compares `analytic` (df/dx at `point`) against central differences
/// (f(x+h) - f(x-h)) / 2h. When `probe` is non-empty only those coordinates are checked.
GradCheckReport grad_check(const ScalarFunction& f, std::span<const double> point,
                           std::span<const double> analytic, double perturbation, double tolerance,
                           std::span<const std::size_t> probe = {});

}  // namespace seagrass::numerics
