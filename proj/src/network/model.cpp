#include "seagrass/network/model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "seagrass/data/transforms.hpp"
#include "seagrass/error.hpp"
#include "seagrass/rng.hpp"

namespace seagrass::network {

using numerics::Shape;

std::array<std::size_t, kStages> NetworkConfig::scaled_widths() const {
  std::array<std::size_t, kStages> out{};
  for (std::size_t s = 0; s < kStages; ++s) {
    out[s] = width_divisor == 0 ? 0 : channel_widths[s] / width_divisor;
  }
  return out;
}

std::size_t NetworkConfig::scaled_fc_channels() const {
  return width_divisor == 0 ? 0 : fc_channels / width_divisor;
}

void NetworkConfig::validate() const {
  std::ostringstream failed;
  if (input_height == 0 || input_height % kInputMultiple != 0) {
    failed << "; input_height " << input_height << " not a positive multiple of " << kInputMultiple;
  }
  if (input_width == 0 || input_width % kInputMultiple != 0) {
    failed << "; input_width " << input_width << " not a positive multiple of " << kInputMultiple;
  }
  if (width_divisor == 0) failed << "; width_divisor must be positive";
  const auto widths = scaled_widths();
  for (std::size_t s = 0; s < kStages; ++s) {
    if (widths[s] == 0) failed << "; stage " << s + 1 << " width scales to 0";
  }
  if (scaled_fc_channels() == 0) failed << "; fc_channels scales to 0";
  if (fc_kernel == 0 || fc_kernel % 2 == 0) failed << "; fc_kernel must be odd";
  if (num_classes != 2) failed << "; num_classes must be 2";
  const std::string msg = failed.str();
  if (!msg.empty()) contract_fail("invalid network config: " + msg.substr(2));
}

NetworkConfig NetworkConfig::toy(std::size_t height, std::size_t width, std::size_t divisor) {
  NetworkConfig c;
  c.input_height = height;
  c.input_width = width;
  c.width_divisor = divisor;
  c.fc_kernel = 3;
  return c;
}

template <typename T>
ConvLayer ModelT<T>::add_conv(const std::string& name, std::size_t in, std::size_t out,
                              std::size_t k, std::size_t padding) {
  ConvLayer layer{name, params_.size(), params_.size() + 1, {1, padding}};
  params_.emplace_back(name + ".weight", Tensor<T>(Shape{out, in, k, k}));
  params_.emplace_back(name + ".bias", Tensor<T>(Shape{1, 1, 1, out}));
  return layer;
}

template <typename T>
UpsampleLayer ModelT<T>::add_upsample(const std::string& name, std::size_t channels,
                                      std::size_t factor) {
  const std::size_t k = numerics::bilinear_kernel_size(factor);
  UpsampleLayer layer{name, params_.size(), factor, {factor, numerics::bilinear_cropping(factor)}};
  params_.emplace_back(name + ".weight", Tensor<T>(Shape{channels, channels, k, k}));
  return layer;
}

template <typename T>
void ModelT<T>::wire(const NetworkConfig& config) {
  config.validate();
  config_ = config;
  params_.clear();
  encoder_.clear();
  const auto widths = config.scaled_widths();
  const std::size_t fc = config.scaled_fc_channels();
  const std::size_t nc = config.num_classes;
  std::size_t in = Image::kChannels;
  for (std::size_t s = 0; s < kStages; ++s) {
    for (std::size_t d = 0; d < kStageDepths[s]; ++d) {
      const std::string name = "conv" + std::to_string(s + 1) + "_" + std::to_string(d + 1);
      encoder_.push_back(add_conv(name, in, widths[s], 3, 1));
      in = widths[s];
    }
  }
  fc6_ = add_conv("fc6", widths[4], fc, config.fc_kernel, config.fc_kernel / 2);
  fc7_ = add_conv("fc7", fc, fc, 1, 0);
  score_fr_ = add_conv("score_fr", fc, nc, 1, 0);
  upscore2_ = add_upsample("upscore2", nc, 2);
  score_pool4_ = add_conv("score_pool4", widths[3], nc, 1, 0);
  upscore_pool4_ = add_upsample("upscore_pool4", nc, 2);
  score_pool3_ = add_conv("score_pool3", widths[2], nc, 1, 0);
  upscore8_ = add_upsample("upscore8", nc, 8);
}

template <typename T>
ModelT<T> ModelT<T>::allocate(const NetworkConfig& config) {
  ModelT m;
  m.wire(config);
  return m;
}

template <typename T>
ModelT<T>::ModelT(const NetworkConfig& config, std::uint64_t seed) {
  wire(config);
  // Encoder and FC stages: truncated Gaussian scaled to fan-in so a randomly initialized
  // 15-layer ReLU stack keeps unit-order activations. Class scores: low-std truncated
  // Gaussian. Upsamplers: bilinear.
  auto init_conv = [&](const ConvLayer& layer, double stddev) {
    auto& w = params_[layer.weight];
    w.value = numerics::truncated_gaussian_init<T>(w.value.shape(), stddev, derive_seed(seed, w.name));
  };
  auto he_std = [&](const ConvLayer& layer) {
    const Shape& s = params_[layer.weight].value.shape();
    return std::sqrt(2.0 / static_cast<double>(s.c * s.h * s.w));
  };
  for (const auto& layer : encoder_) init_conv(layer, he_std(layer));
  init_conv(fc6_, he_std(fc6_));
  init_conv(fc7_, he_std(fc7_));
  for (const ConvLayer* layer : {&score_fr_, &score_pool4_, &score_pool3_}) {
    init_conv(*layer, numerics::kDefaultInitStd);
  }
  for (const UpsampleLayer* layer : {&upscore2_, &upscore_pool4_, &upscore8_}) {
    params_[layer->weight].value = numerics::bilinear_kernel<T>(layer->factor, config.num_classes);
  }
}

template <typename T>
ParamState<T>& ModelT<T>::param(std::string_view name) {
  for (auto& p : params_) {
    if (p.name == name) return p;
  }
  contract_fail("unknown parameter '" + std::string(name) + "'");
}

template <typename T>
const ParamState<T>& ModelT<T>::param(std::string_view name) const {
  for (const auto& p : params_) {
    if (p.name == name) return p;
  }
  contract_fail("unknown parameter '" + std::string(name) + "'");
}

template <typename T>
std::size_t ModelT<T>::parameter_count() const {
  std::size_t n = 0;
  for (const auto& p : params_) n += p.value.size();
  return n;
}

template <typename T>
ProbabilityMap ForwardPass<T>::posidonia() const {
  const Shape& s = probabilities.shape();
  ProbabilityMap map(s.h, s.w);
  const T* src = probabilities.plane(0, numerics::kPosidoniaChannel);
  for (std::size_t i = 0; i < map.values.size(); ++i) map.values[i] = static_cast<float>(src[i]);
  return map;
}

template <typename T>
Tensor<T> image_to_tensor(const Image& image) {
  Tensor<T> t(Shape{1, Image::kChannels, image.height, image.width});
  std::transform(image.pixels.begin(), image.pixels.end(), t.data().begin(),
                 [](float v) { return static_cast<T>(v); });
  return t;
}

namespace {

template <typename T>
std::span<const T> bias_of(const ModelT<T>& m, const ConvLayer& layer) {
  return m.params()[layer.bias].value.data();
}

template <typename T>
Tensor<T> conv(const ModelT<T>& m, const ConvLayer& layer, const Tensor<T>& x) {
  return numerics::conv2d_forward(x, m.params()[layer.weight].value, bias_of(m, layer), layer.geometry);
}

template <typename T>
Tensor<T> upsample(const ModelT<T>& m, const UpsampleLayer& layer, const Tensor<T>& x) {
  return numerics::transposed_conv2d_forward(x, m.params()[layer.weight].value, layer.geometry);
}

template <typename T>
Tensor<T> run_forward(const ModelT<T>& m, Tensor<T> x, bool train_mode, std::uint64_t seed,
                      ForwardCache<T>& cache) {
  const auto& config = m.config();
  require(x.shape().h == config.input_height && x.shape().w == config.input_width,
          "forward: image " + std::to_string(x.shape().h) + "x" + std::to_string(x.shape().w) +
              " does not match model input " + std::to_string(config.input_height) + "x" +
              std::to_string(config.input_width));
  require(x.shape().c == Image::kChannels, "forward: expected a 3-channel image");
  cache = ForwardCache<T>{};
  cache.model_version = m.version();
  cache.train_mode = train_mode;
  cache.input_shape = x.shape();

  std::size_t index = 0;
  for (std::size_t s = 0; s < kStages; ++s) {
    for (std::size_t d = 0; d < kStageDepths[s]; ++d) {
      const ConvLayer& layer = m.encoder()[index++];
      Tensor<T> pre = conv(m, layer, x);
      Tensor<T> act = numerics::relu_forward(pre);
      cache.conv_inputs.push_back(std::move(x));
      cache.conv_preacts.push_back(std::move(pre));
      x = std::move(act);
    }
    auto pooled = numerics::maxpool2d_forward(x);
    cache.pool_input_shapes.push_back(x.shape());
    cache.pool_argmax.push_back(std::move(pooled.argmax));
    x = std::move(pooled.output);
    cache.pooled_extents.emplace_back(x.shape().h, x.shape().w);
    if (s == 2) cache.pool3 = x;
    if (s == 3) cache.pool4 = x;
  }

  cache.fc6_input = x;
  cache.fc6_preact = conv(m, m.fc6(), x);
  auto drop6 = numerics::dropout_forward(numerics::relu_forward(cache.fc6_preact), kDropoutProbability,
                                         train_mode, derive_seed(seed, "fc6"));
  cache.fc6_mask = std::move(drop6.mask);

  cache.fc7_input = drop6.output;
  cache.fc7_preact = conv(m, m.fc7(), drop6.output);
  auto drop7 = numerics::dropout_forward(numerics::relu_forward(cache.fc7_preact), kDropoutProbability,
                                         train_mode, derive_seed(seed, "fc7"));
  cache.fc7_mask = std::move(drop7.mask);

  cache.score_input = drop7.output;
  cache.score_final = conv(m, m.score_final(), drop7.output);
  Tensor<T> fuse4 = upsample(m, m.upscore2(), cache.score_final);
  fuse4 += conv(m, m.score_pool4(), cache.pool4);
  cache.fuse_pool4 = fuse4;
  Tensor<T> fuse3 = upsample(m, m.upscore_pool4(), fuse4);
  fuse3 += conv(m, m.score_pool3(), cache.pool3);
  cache.fuse_pool3 = fuse3;
  return upsample(m, m.upscore8(), fuse3);
}

template <typename T>
void set_conv_grads(ModelT<T>& m, const ConvLayer& layer, numerics::ConvGrads<T>& g) {
  m.params()[layer.weight].grad = std::move(g.kernel);
  auto& bias = m.params()[layer.bias].grad;
  std::copy(g.bias.begin(), g.bias.end(), bias.data().begin());
}

template <typename T>
Tensor<T> conv_backward(ModelT<T>& m, const ConvLayer& layer, const Tensor<T>& input,
                        const Tensor<T>& grad_out) {
  auto g = numerics::conv2d_backward(input, m.params()[layer.weight].value, grad_out, layer.geometry);
  set_conv_grads(m, layer, g);
  return std::move(g.input);
}

template <typename T>
Tensor<T> upsample_backward(ModelT<T>& m, const UpsampleLayer& layer, const Tensor<T>& input,
                            const Tensor<T>& grad_out) {
  auto g = numerics::transposed_conv2d_backward(input, m.params()[layer.weight].value, grad_out,
                                                layer.geometry);
  m.params()[layer.weight].grad = std::move(g.kernel);
  return std::move(g.input);
}

}  // namespace

template <typename T>
ForwardPass<T> forward(const ModelT<T>& model, const Image& image, bool train_mode,
                       std::uint64_t dropout_seed) {
  ForwardPass<T> pass;
  Tensor<T> logits = run_forward(model, image_to_tensor<T>(image), train_mode, dropout_seed, pass.cache);
  pass.probabilities = numerics::softmax_channels(logits);
  pass.cache.probabilities = pass.probabilities;
  return pass;
}

template <typename T>
Tensor<T> forward_logits(const ModelT<T>& model, const Image& image) {
  ForwardCache<T> cache;
  return run_forward(model, image_to_tensor<T>(image), false, 0, cache);
}

template <typename T>
T backward(ModelT<T>& model, const ForwardCache<T>& cache, const LabelMap& labels,
           std::span<const T> pixel_weights) {
  require(cache.model_version == model.version(),
          "backward: cache was produced before the last parameter update (stale cache)");
  require(cache.train_mode, "backward: cache must come from a train-mode forward pass");
  require(cache.input_shape.h == model.config().input_height &&
              cache.input_shape.w == model.config().input_width &&
              cache.conv_inputs.size() == model.encoder().size(),
          "backward: cache does not match this model");
  require(labels.height == cache.input_shape.h && labels.width == cache.input_shape.w,
          "backward: label extents do not match the cached input");

  auto ce = numerics::cross_entropy(cache.probabilities, labels.classes, pixel_weights);

  Tensor<T> g_fuse3 = upsample_backward(model, model.upscore8(), cache.fuse_pool3, ce.logit_grad);
  Tensor<T> g_pool3_skip = conv_backward(model, model.score_pool3(), cache.pool3, g_fuse3);
  Tensor<T> g_fuse4 = upsample_backward(model, model.upscore_pool4(), cache.fuse_pool4, g_fuse3);
  Tensor<T> g_pool4_skip = conv_backward(model, model.score_pool4(), cache.pool4, g_fuse4);
  Tensor<T> g_score = upsample_backward(model, model.upscore2(), cache.score_final, g_fuse4);

  Tensor<T> g = conv_backward(model, model.score_final(), cache.score_input, g_score);
  g = numerics::dropout_backward(g, std::span<const T>(cache.fc7_mask));
  g = numerics::relu_backward(cache.fc7_preact, g);
  g = conv_backward(model, model.fc7(), cache.fc7_input, g);
  g = numerics::dropout_backward(g, std::span<const T>(cache.fc6_mask));
  g = numerics::relu_backward(cache.fc6_preact, g);
  g = conv_backward(model, model.fc6(), cache.fc6_input, g);

  std::size_t index = model.encoder().size();
  for (std::size_t s = kStages; s-- > 0;) {
    if (s == 3) g += g_pool4_skip;
    if (s == 2) g += g_pool3_skip;
    g = numerics::maxpool2d_backward(g, cache.pool_argmax[s], cache.pool_input_shapes[s]);
    for (std::size_t d = 0; d < kStageDepths[s]; ++d) {
      --index;
      g = numerics::relu_backward(cache.conv_preacts[index], g);
      g = conv_backward(model, model.encoder()[index], cache.conv_inputs[index], g);
    }
  }
  return ce.loss;
}

template <typename T>
ProbabilityMap predict(const ModelT<T>& model, const Image& image) {
  return forward(model, image, false, 0).posidonia();
}

ProbabilityMap segment(const Model& model, const Image& image) {
  const auto padding = data::padding_for(image.height, image.width, kInputMultiple);
  if (padding.top + padding.bottom + padding.left + padding.right == 0) return predict(model, image);
  return data::crop(predict(model, data::pad(image, padding)), padding);
}

template class ModelT<float>;
template class ModelT<double>;

#define SEAGRASS_INSTANTIATE_NETWORK(T)                                                         \
  template struct ForwardPass<T>;                                                              \
  template Tensor<T> image_to_tensor<T>(const Image&);                                         \
  template ForwardPass<T> forward(const ModelT<T>&, const Image&, bool, std::uint64_t);        \
  template Tensor<T> forward_logits(const ModelT<T>&, const Image&);                           \
  template T backward(ModelT<T>&, const ForwardCache<T>&, const LabelMap&, std::span<const T>); \
  template ProbabilityMap predict(const ModelT<T>&, const Image&);

SEAGRASS_INSTANTIATE_NETWORK(float)
SEAGRASS_INSTANTIATE_NETWORK(double)

}  // namespace seagrass::network
