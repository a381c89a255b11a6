#pragma once

#include <cstdint>
#include <span>
#include <string>

#include "seagrass/numerics/tensor.hpp"

namespace seagrass::numerics {

/// A trainable tensor with its gradient and Adam moment estimates.
template <typename T>
struct ParamState {
  std::string name;
  Tensor<T> value;
  Tensor<T> grad;
  Tensor<T> adam_m;
  Tensor<T> adam_v;
  std::uint64_t step_count = 0;

  ParamState() = default;
  ParamState(std::string param_name, Tensor<T> initial)
      : name(std::move(param_name)),
        value(std::move(initial)),
        grad(value.shape()),
        adam_m(value.shape()),
        adam_v(value.shape()) {}
};

struct AdamOptions {
  double learning_rate = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// One bias-corrected Adam update of every parameter from its populated grad.
template <typename T>
void adam_step(std::span<ParamState<T>> params, const AdamOptions& options);

inline constexpr double kDefaultInitStd = 0.01;

/// Samples N(0, std^2), redrawing any value with |x| > 2 std.
template <typename T>
Tensor<T> truncated_gaussian_init(const Shape& shape, double stddev, std::uint64_t seed);

}  // namespace seagrass::numerics
