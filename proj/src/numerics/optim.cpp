#include "seagrass/numerics/optim.hpp"

#include <cmath>
#include <random>

#include "seagrass/error.hpp"
#include "seagrass/rng.hpp"

namespace seagrass::numerics {

template <typename T>
void adam_step(std::span<ParamState<T>> params, const AdamOptions& options) {
  require(options.learning_rate > 0.0, "adam_step: learning rate must be positive");
  for (auto& p : params) {
    require(p.grad.shape() == p.value.shape() && p.adam_m.shape() == p.value.shape() &&
                p.adam_v.shape() == p.value.shape(),
            "adam_step: state shapes of '" + p.name + "' disagree");
    ++p.step_count;
    const double t = static_cast<double>(p.step_count);
    const double correction1 = 1.0 - std::pow(options.beta1, t);
    const double correction2 = 1.0 - std::pow(options.beta2, t);
    for (std::size_t i = 0; i < p.value.size(); ++i) {
      const double g = p.grad[i];
      const double m = options.beta1 * p.adam_m[i] + (1.0 - options.beta1) * g;
      const double v = options.beta2 * p.adam_v[i] + (1.0 - options.beta2) * g * g;
      p.adam_m[i] = static_cast<T>(m);
      p.adam_v[i] = static_cast<T>(v);
      const double m_hat = m / correction1;
      const double v_hat = v / correction2;
      p.value[i] = static_cast<T>(p.value[i] -
                                  options.learning_rate * m_hat / (std::sqrt(v_hat) + options.epsilon));
    }
  }
}

template <typename T>
Tensor<T> truncated_gaussian_init(const Shape& shape, double stddev, std::uint64_t seed) {
  require(stddev > 0.0, "truncated_gaussian_init: std must be positive");
  Rng rng(seed);
  std::normal_distribution<double> normal(0.0, stddev);
  Tensor<T> out(shape);
  const double bound = 2.0 * stddev;
  for (auto& v : out.data()) {
    double x = normal(rng);
    while (std::abs(x) > bound) x = normal(rng);
    v = static_cast<T>(x);
  }
  return out;
}

template void adam_step(std::span<ParamState<float>>, const AdamOptions&);
template void adam_step(std::span<ParamState<double>>, const AdamOptions&);
template Tensor<float> truncated_gaussian_init(const Shape&, double, std::uint64_t);
template Tensor<double> truncated_gaussian_init(const Shape&, double, std::uint64_t);

}  // namespace seagrass::numerics
