#include "seagrass/numerics/grad_check.hpp"

#include <algorithm>
#include <cmath>

#include "seagrass/error.hpp"

namespace seagrass::numerics {

double relative_error(double analytic, double numeric) {
  const double scale = std::max({std::abs(analytic), std::abs(numeric), 1e-8});
  return std::abs(analytic - numeric) / scale;
}

GradCheckReport grad_check(const ScalarFunction& f, std::span<const double> point,
                           std::span<const double> analytic, double perturbation, double tolerance,
                           std::span<const std::size_t> probe) {
  require(analytic.size() == point.size(), "grad_check: analytic gradient length mismatch");
  require(perturbation > 0.0, "grad_check: perturbation must be positive");
  std::vector<double> x(point.begin(), point.end());
  GradCheckReport report;
  auto check = [&](std::size_t i) {
    require(i < x.size(), "grad_check: probe index out of range");
    const double saved = x[i];
    x[i] = saved + perturbation;
    const double up = f(x);
    x[i] = saved - perturbation;
    const double down = f(x);
    x[i] = saved;
    const double numeric = (up - down) / (2.0 * perturbation);
    const double err = relative_error(analytic[i], numeric);
    if (err > report.max_relative_error || report.probes == 0) {
      report.max_relative_error = err;
      report.worst_index = i;
    }
    ++report.probes;
  };
  if (probe.empty()) {
    for (std::size_t i = 0; i < x.size(); ++i) check(i);
  } else {
    for (std::size_t i : probe) check(i);
  }
  report.passed = report.max_relative_error <= tolerance;
  return report;
}

}  // namespace seagrass::numerics
