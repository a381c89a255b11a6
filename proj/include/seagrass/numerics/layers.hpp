#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "seagrass/numerics/tensor.hpp"

namespace seagrass::numerics {

// Channel index of each class in a two-class logit/probability tensor.
// Matches the LabelMap encoding (background = 0, P.O. = 1).
inline constexpr std::size_t kBackgroundChannel = 0;
inline constexpr std::size_t kPosidoniaChannel = 1;

struct ConvGeometry {
  std::size_t stride = 1;
  std::size_t padding = 0;
};

/// Output extent of a strided, padded cross-correlation along one axis.
/// Throws ContractViolation when the geometry does not tile exactly.
std::size_t conv_output_extent(std::size_t in, std::size_t kernel, const ConvGeometry& g,
                               const char* axis);

template <typename T>
struct ConvGrads {
  Tensor<T> input;
  Tensor<T> kernel;
  std::vector<T> bias;
};

/// kernel: (out_channels, in_channels, kH, kW). bias may be empty (treated as zero).
template <typename T>
Tensor<T> conv2d_forward(const Tensor<T>& input, const Tensor<T>& kernel, std::span<const T> bias,
                         const ConvGeometry& g);

template <typename T>
ConvGrads<T> conv2d_backward(const Tensor<T>& input, const Tensor<T>& kernel,
                             const Tensor<T>& grad_output, const ConvGeometry& g);

template <typename T>
Tensor<T> relu_forward(const Tensor<T>& input);

template <typename T>
Tensor<T> relu_backward(const Tensor<T>& input, const Tensor<T>& grad_output);

template <typename T>
struct MaxPoolResult {
  Tensor<T> output;
  // Flat input index of the winning element of each output window.
  std::vector<std::size_t> argmax;
};

/// 2x2 window, stride 2. Ties resolve to the first element in row-major scan order.
template <typename T>
MaxPoolResult<T> maxpool2d_forward(const Tensor<T>& input);

template <typename T>
Tensor<T> maxpool2d_backward(const Tensor<T>& grad_output, std::span<const std::size_t> argmax,
                             const Shape& input_shape);

struct TransposedGeometry {
  std::size_t stride = 1;
  std::size_t cropping = 0;
};

std::size_t transposed_output_extent(std::size_t in, std::size_t kernel,
                                     const TransposedGeometry& g, const char* axis);

template <typename T>
struct TransposedGrads {
  Tensor<T> input;
  Tensor<T> kernel;
};

/// kernel: (in_channels, out_channels, kH, kW). This is the adjoint of conv2d with
/// the same kernel tensor, stride, and padding = cropping.
template <typename T>
Tensor<T> transposed_conv2d_forward(const Tensor<T>& input, const Tensor<T>& kernel,
                                    const TransposedGeometry& g);

template <typename T>
TransposedGrads<T> transposed_conv2d_backward(const Tensor<T>& input, const Tensor<T>& kernel,
                                              const Tensor<T>& grad_output,
                                              const TransposedGeometry& g);

/// Kernel size used by bilinear upsampling for an integer factor.
constexpr std::size_t bilinear_kernel_size(std::size_t factor) {
  return 2 * factor - factor % 2;
}

/// Cropping that makes a stride-`factor` transposed conv with the bilinear kernel
/// produce exactly factor * H outputs.
constexpr std::size_t bilinear_cropping(std::size_t factor) {
  return (bilinear_kernel_size(factor) - factor) / 2;
}

/// (channels, channels, k, k) kernel performing per-channel bilinear upsampling.
template <typename T>
Tensor<T> bilinear_kernel(std::size_t factor, std::size_t channels);

template <typename T>
struct DropoutResult {
  Tensor<T> output;
  // Per-element multiplier: 0 for dropped, 1/(1-p) for kept, 1 in inference mode.
  std::vector<T> mask;
};

/// Inverted dropout.
template <typename T>
DropoutResult<T> dropout_forward(const Tensor<T>& input, double p, bool train_mode,
                                 std::uint64_t seed);

template <typename T>
Tensor<T> dropout_backward(const Tensor<T>& grad_output, std::span<const T> mask);

/// Per-pixel softmax across the two class channels; returns (N, 2, H, W).
template <typename T>
Tensor<T> softmax_channels(const Tensor<T>& logits);

/// P.O.-class probability only, shape (N, 1, H, W).
template <typename T>
Tensor<T> softmax_2class(const Tensor<T>& logits);

inline constexpr double kProbabilityFloor = 1e-12;

template <typename T>
struct CrossEntropyResult {
  T loss{};
  Tensor<T> logit_grad;
};

/// Mean pixel cross-entropy of softmax probabilities (N, 2, H, W) against binary labels
/// (N*H*W entries). Optional per-pixel weights scale each pixel's term.
template <typename T>
CrossEntropyResult<T> cross_entropy(const Tensor<T>& probabilities,
                                    std::span<const std::uint8_t> labels,
                                    std::span<const T> weights = {});

}  // namespace seagrass::numerics
