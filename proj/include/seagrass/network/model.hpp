#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "seagrass/data/raster.hpp"
#include "seagrass/numerics/layers.hpp"
#include "seagrass/numerics/optim.hpp"
#include "seagrass/numerics/tensor.hpp"

namespace seagrass::network {

using numerics::ParamState;
using numerics::Tensor;

inline constexpr std::size_t kStages = 5;
/// Convolutions per encoder stage (VGG16).
inline constexpr std::array<std::size_t, kStages> kStageDepths{2, 2, 3, 3, 3};
inline constexpr std::array<std::size_t, kStages> kReferenceWidths{64, 128, 256, 512, 512};
inline constexpr std::size_t kReferenceFcChannels = 4096;
inline constexpr std::size_t kInputMultiple = 32;
inline constexpr double kDropoutProbability = 0.5;

/// Shape of the encoder/decoder. Widths are given at reference scale and divided by
/// width_divisor; fc_kernel is the spatial size of the first convolutionalized FC stage.
struct NetworkConfig {
  std::size_t input_height = 384;
  std::size_t input_width = 480;
  std::array<std::size_t, kStages> channel_widths = kReferenceWidths;
  std::size_t fc_channels = kReferenceFcChannels;
  std::size_t fc_kernel = 7;
  std::size_t num_classes = 2;
  std::size_t width_divisor = 1;

  std::array<std::size_t, kStages> scaled_widths() const;
  std::size_t scaled_fc_channels() const;
  /// Throws ContractViolation naming every failed invariant.
  void validate() const;

  /// Desk-scale configuration: reference widths divided by `divisor`, 3x3 FC kernel.
  static NetworkConfig toy(std::size_t height, std::size_t width, std::size_t divisor);

  friend bool operator==(const NetworkConfig&, const NetworkConfig&) = default;
};

struct ConvLayer {
  std::string name;
  std::size_t weight = 0;  // index into the parameter list
  std::size_t bias = 0;
  numerics::ConvGeometry geometry;
};

struct UpsampleLayer {
  std::string name;
  std::size_t weight = 0;
  std::size_t factor = 2;
  numerics::TransposedGeometry geometry;
};

/// VGG16-FCN8 parameters and layer wiring.
template <typename T>
class ModelT {
 public:
  ModelT() = default;
  /// Builds and initializes every parameter from `config` and `seed`.
  ModelT(const NetworkConfig& config, std::uint64_t seed);

  /// Same wiring and parameter values at a different precision (optimizer state reset).
  template <typename U>
  explicit ModelT(const ModelT<U>& other);

  const NetworkConfig& config() const { return config_; }

  std::span<ParamState<T>> params() { return params_; }
  std::span<const ParamState<T>> params() const { return params_; }
  ParamState<T>& param(std::string_view name);
  const ParamState<T>& param(std::string_view name) const;
  std::size_t parameter_count() const;

  const std::vector<ConvLayer>& encoder() const { return encoder_; }
  const ConvLayer& fc6() const { return fc6_; }
  const ConvLayer& fc7() const { return fc7_; }
  const ConvLayer& score_final() const { return score_fr_; }
  const ConvLayer& score_pool4() const { return score_pool4_; }
  const ConvLayer& score_pool3() const { return score_pool3_; }
  const UpsampleLayer& upscore2() const { return upscore2_; }
  const UpsampleLayer& upscore_pool4() const { return upscore_pool4_; }
  const UpsampleLayer& upscore8() const { return upscore8_; }

  /// Counter bumped after every parameter update; forward caches record it.
  std::uint64_t version() const { return version_; }
  void mark_updated() { ++version_; }

  /// Set for models loaded from a frozen file; training rejects them.
  bool inference_only() const { return inference_only_; }
  void set_inference_only(bool value) { inference_only_ = value; }

  /// Parameter tensors with shapes fixed by `config`, all zero (no initialization).
  static ModelT allocate(const NetworkConfig& config);

 private:
  template <typename U>
  friend class ModelT;

  void wire(const NetworkConfig& config);
  ConvLayer add_conv(const std::string& name, std::size_t in, std::size_t out, std::size_t k,
                     std::size_t padding);
  UpsampleLayer add_upsample(const std::string& name, std::size_t channels, std::size_t factor);

  NetworkConfig config_{};
  std::vector<ParamState<T>> params_;
  std::vector<ConvLayer> encoder_;
  ConvLayer fc6_, fc7_, score_fr_, score_pool4_, score_pool3_;
  UpsampleLayer upscore2_, upscore_pool4_, upscore8_;
  std::uint64_t version_ = 0;
  bool inference_only_ = false;
};

template <typename T>
template <typename U>
ModelT<T>::ModelT(const ModelT<U>& other)
    : config_(other.config_),
      encoder_(other.encoder_),
      fc6_(other.fc6_),
      fc7_(other.fc7_),
      score_fr_(other.score_fr_),
      score_pool4_(other.score_pool4_),
      score_pool3_(other.score_pool3_),
      upscore2_(other.upscore2_),
      upscore_pool4_(other.upscore_pool4_),
      upscore8_(other.upscore8_),
      inference_only_(other.inference_only_) {
  params_.reserve(other.params_.size());
  for (const auto& p : other.params_) {
    params_.emplace_back(p.name, p.value.template cast<T>());
  }
}

using Model = ModelT<float>;

template <typename T>
ModelT<T> build_model(const NetworkConfig& config, std::uint64_t seed) {
  return ModelT<T>(config, seed);
}

inline Model build_model(const NetworkConfig& config, std::uint64_t seed) {
  return Model(config, seed);
}

/// Activations retained by a forward pass for the matching backward pass.
template <typename T>
struct ForwardCache {
  std::uint64_t model_version = 0;
  bool train_mode = false;
  numerics::Shape input_shape;

  std::vector<Tensor<T>> conv_inputs;     // per encoder conv
  std::vector<Tensor<T>> conv_preacts;    // per encoder conv, before ReLU
  std::vector<std::vector<std::size_t>> pool_argmax;  // per stage
  std::vector<numerics::Shape> pool_input_shapes;

  Tensor<T> fc6_input, fc6_preact, fc7_input, fc7_preact, score_input;
  std::vector<T> fc6_mask, fc7_mask;
  Tensor<T> pool3, pool4;
  Tensor<T> score_final, fuse_pool4, fuse_pool3;
  Tensor<T> probabilities;  // (1, 2, H, W)

  /// Spatial extents of each stage's pooled output.
  std::vector<std::pair<std::size_t, std::size_t>> pooled_extents;
};

template <typename T>
struct ForwardPass {
  Tensor<T> probabilities;  // (1, 2, H, W) softmax over both classes
  ForwardCache<T> cache;

  ProbabilityMap posidonia() const;
};

template <typename T>
Tensor<T> image_to_tensor(const Image& image);

/// Encoder/decoder forward pass. Dropout is active only when train_mode is set.
template <typename T>
ForwardPass<T> forward(const ModelT<T>& model, const Image& image, bool train_mode,
                       std::uint64_t dropout_seed);

/// Logits before the softmax, inference mode (used by the skip-fusion probe).
template <typename T>
Tensor<T> forward_logits(const ModelT<T>& model, const Image& image);

/// Cross-entropy loss of the cached pass against `labels`; overwrites every parameter's
/// grad. Optional per-pixel weights scale each pixel's loss term.
template <typename T>
T backward(ModelT<T>& model, const ForwardCache<T>& cache, const LabelMap& labels,
           std::span<const T> pixel_weights = {});

/// Inference forward pass, P.O. probability only.
template <typename T>
ProbabilityMap predict(const ModelT<T>& model, const Image& image);

/// Pads an image of any extents to the next multiple of 32 (zero fill, split evenly),
/// predicts, and crops back. The padded extents must equal the model's input extents.
ProbabilityMap segment(const Model& model, const Image& image);

extern template class ModelT<float>;
extern template class ModelT<double>;

}  // namespace seagrass::network
