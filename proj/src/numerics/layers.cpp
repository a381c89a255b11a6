#include "seagrass/numerics/layers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "seagrass/error.hpp"
#include "seagrass/rng.hpp"

namespace seagrass::numerics {

namespace {

using Index = std::ptrdiff_t;

// Range [lo, hi) of output positions x for which x*stride + k - pad lands inside [0, in).
struct ValidRange {
  Index lo;
  Index hi;
};

ValidRange valid_range(Index out, Index in, Index k, Index stride, Index pad) {
  // x*stride >= pad - k
  Index num = pad - k;
  Index lo = num <= 0 ? 0 : (num + stride - 1) / stride;
  // x*stride <= in - 1 + pad - k
  Index top = in - 1 + pad - k;
  Index hi = top < 0 ? 0 : top / stride + 1;
  return {std::max<Index>(lo, 0), std::min(hi, out)};
}

struct PlaneGeom {
  Index in_h, in_w;    // the "dense input" side of a cross-correlation
  Index out_h, out_w;  // the strided side
  Index k_h, k_w;
  Index stride, pad;
};

// out += correlate(in, k)
template <typename T>
void correlate_plane(const T* in, const T* k, T* out, const PlaneGeom& g) {
  for (Index ky = 0; ky < g.k_h; ++ky) {
    const auto ry = valid_range(g.out_h, g.in_h, ky, g.stride, g.pad);
    for (Index kx = 0; kx < g.k_w; ++kx) {
      const T w = k[ky * g.k_w + kx];
      if (w == T{}) continue;
      const auto rx = valid_range(g.out_w, g.in_w, kx, g.stride, g.pad);
      for (Index y = ry.lo; y < ry.hi; ++y) {
        const T* in_row = in + (y * g.stride + ky - g.pad) * g.in_w + kx - g.pad;
        T* out_row = out + y * g.out_w;
        if (g.stride == 1) {
          for (Index x = rx.lo; x < rx.hi; ++x) out_row[x] += w * in_row[x];
        } else {
          for (Index x = rx.lo; x < rx.hi; ++x) out_row[x] += w * in_row[x * g.stride];
        }
      }
    }
  }
}

// in += scatter(out, k); the adjoint of correlate_plane in its `in` argument.
template <typename T>
void scatter_plane(const T* out, const T* k, T* in, const PlaneGeom& g) {
  for (Index ky = 0; ky < g.k_h; ++ky) {
    const auto ry = valid_range(g.out_h, g.in_h, ky, g.stride, g.pad);
    for (Index kx = 0; kx < g.k_w; ++kx) {
      const T w = k[ky * g.k_w + kx];
      if (w == T{}) continue;
      const auto rx = valid_range(g.out_w, g.in_w, kx, g.stride, g.pad);
      for (Index y = ry.lo; y < ry.hi; ++y) {
        T* in_row = in + (y * g.stride + ky - g.pad) * g.in_w + kx - g.pad;
        const T* out_row = out + y * g.out_w;
        if (g.stride == 1) {
          for (Index x = rx.lo; x < rx.hi; ++x) in_row[x] += w * out_row[x];
        } else {
          for (Index x = rx.lo; x < rx.hi; ++x) in_row[x * g.stride] += w * out_row[x];
        }
      }
    }
  }
}

// gk += d<out, correlate(in, k)>/dk
template <typename T>
void kernel_grad_plane(const T* in, const T* out, T* gk, const PlaneGeom& g) {
  for (Index ky = 0; ky < g.k_h; ++ky) {
    const auto ry = valid_range(g.out_h, g.in_h, ky, g.stride, g.pad);
    for (Index kx = 0; kx < g.k_w; ++kx) {
      const auto rx = valid_range(g.out_w, g.in_w, kx, g.stride, g.pad);
      T acc{};
      for (Index y = ry.lo; y < ry.hi; ++y) {
        const T* in_row = in + (y * g.stride + ky - g.pad) * g.in_w + kx - g.pad;
        const T* out_row = out + y * g.out_w;
        if (g.stride == 1) {
          for (Index x = rx.lo; x < rx.hi; ++x) acc += out_row[x] * in_row[x];
        } else {
          for (Index x = rx.lo; x < rx.hi; ++x) acc += out_row[x] * in_row[x * g.stride];
        }
      }
      gk[ky * g.k_w + kx] += acc;
    }
  }
}

std::string dim(const char* what, std::size_t got, std::size_t want) {
  return std::string(what) + " = " + std::to_string(got) + ", expected " + std::to_string(want);
}

}  // namespace

std::size_t conv_output_extent(std::size_t in, std::size_t kernel, const ConvGeometry& g,
                               const char* axis) {
  require(g.stride >= 1, "conv2d: stride must be positive");
  const auto padded = static_cast<Index>(in + 2 * g.padding);
  const auto span = padded - static_cast<Index>(kernel);
  require(span >= 0 && span % static_cast<Index>(g.stride) == 0,
          std::string("conv2d: ") + axis + " extent " + std::to_string(in) + " with padding " +
              std::to_string(g.padding) + " does not tile kernel " + std::to_string(kernel) +
              " at stride " + std::to_string(g.stride));
  return static_cast<std::size_t>(span) / g.stride + 1;
}

template <typename T>
Tensor<T> conv2d_forward(const Tensor<T>& input, const Tensor<T>& kernel, std::span<const T> bias,
                         const ConvGeometry& g) {
  const Shape& is = input.shape();
  const Shape& ks = kernel.shape();
  require(ks.c == is.c, "conv2d: " + dim("kernel input channels", ks.c, is.c));
  require(bias.empty() || bias.size() == ks.n, "conv2d: " + dim("bias length", bias.size(), ks.n));
  const std::size_t oh = conv_output_extent(is.h, ks.h, g, "height");
  const std::size_t ow = conv_output_extent(is.w, ks.w, g, "width");
  Tensor<T> out({is.n, ks.n, oh, ow});
  const PlaneGeom pg{Index(is.h), Index(is.w), Index(oh), Index(ow),
                     Index(ks.h), Index(ks.w), Index(g.stride), Index(g.padding)};
  for (std::size_t b = 0; b < is.n; ++b) {
    for (std::size_t o = 0; o < ks.n; ++o) {
      T* dst = out.plane(b, o);
      if (!bias.empty()) std::fill(dst, dst + oh * ow, bias[o]);
      for (std::size_t c = 0; c < is.c; ++c) {
        correlate_plane(input.plane(b, c), kernel.plane(o, c), dst, pg);
      }
    }
  }
  return out;
}

template <typename T>
ConvGrads<T> conv2d_backward(const Tensor<T>& input, const Tensor<T>& kernel,
                             const Tensor<T>& grad_output, const ConvGeometry& g) {
  const Shape& is = input.shape();
  const Shape& ks = kernel.shape();
  require(ks.c == is.c, "conv2d backward: " + dim("kernel input channels", ks.c, is.c));
  const std::size_t oh = conv_output_extent(is.h, ks.h, g, "height");
  const std::size_t ow = conv_output_extent(is.w, ks.w, g, "width");
  const Shape expected{is.n, ks.n, oh, ow};
  require(grad_output.shape() == expected, "conv2d backward: upstream gradient shape " +
                                               to_string(grad_output.shape()) + ", expected " +
                                               to_string(expected));
  ConvGrads<T> grads{Tensor<T>(is), Tensor<T>(ks), std::vector<T>(ks.n, T{})};
  const PlaneGeom pg{Index(is.h), Index(is.w), Index(oh), Index(ow),
                     Index(ks.h), Index(ks.w), Index(g.stride), Index(g.padding)};
  for (std::size_t b = 0; b < is.n; ++b) {
    for (std::size_t o = 0; o < ks.n; ++o) {
      const T* gout = grad_output.plane(b, o);
      T acc{};
      for (std::size_t i = 0; i < oh * ow; ++i) acc += gout[i];
      grads.bias[o] += acc;
      for (std::size_t c = 0; c < is.c; ++c) {
        scatter_plane(gout, kernel.plane(o, c), grads.input.plane(b, c), pg);
        kernel_grad_plane(input.plane(b, c), gout, grads.kernel.plane(o, c), pg);
      }
    }
  }
  return grads;
}

template <typename T>
Tensor<T> relu_forward(const Tensor<T>& input) {
  Tensor<T> out(input.shape());
  for (std::size_t i = 0; i < input.size(); ++i) out[i] = input[i] > T{} ? input[i] : T{};
  return out;
}

template <typename T>
Tensor<T> relu_backward(const Tensor<T>& input, const Tensor<T>& grad_output) {
  require(input.shape() == grad_output.shape(), "relu backward: shape mismatch");
  Tensor<T> out(input.shape());
  for (std::size_t i = 0; i < input.size(); ++i) {
    out[i] = input[i] > T{} ? grad_output[i] : T{};
  }
  return out;
}

template <typename T>
MaxPoolResult<T> maxpool2d_forward(const Tensor<T>& input) {
  const Shape& s = input.shape();
  require(s.h % 2 == 0, "maxpool2d: odd height " + std::to_string(s.h));
  require(s.w % 2 == 0, "maxpool2d: odd width " + std::to_string(s.w));
  const std::size_t oh = s.h / 2;
  const std::size_t ow = s.w / 2;
  MaxPoolResult<T> r{Tensor<T>({s.n, s.c, oh, ow}), {}};
  r.argmax.resize(r.output.size());
  std::size_t o = 0;
  for (std::size_t b = 0; b < s.n; ++b) {
    for (std::size_t c = 0; c < s.c; ++c) {
      for (std::size_t y = 0; y < oh; ++y) {
        for (std::size_t x = 0; x < ow; ++x, ++o) {
          std::size_t best = input.index(b, c, 2 * y, 2 * x);
          for (std::size_t dy = 0; dy < 2; ++dy) {
            for (std::size_t dx = 0; dx < 2; ++dx) {
              const std::size_t i = input.index(b, c, 2 * y + dy, 2 * x + dx);
              if (input[i] > input[best]) best = i;
            }
          }
          r.output[o] = input[best];
          r.argmax[o] = best;
        }
      }
    }
  }
  return r;
}

template <typename T>
Tensor<T> maxpool2d_backward(const Tensor<T>& grad_output, std::span<const std::size_t> argmax,
                             const Shape& input_shape) {
  require(argmax.size() == grad_output.size(), "maxpool2d backward: argmax size mismatch");
  Tensor<T> grad(input_shape);
  for (std::size_t i = 0; i < argmax.size(); ++i) {
    require(argmax[i] < grad.size(), "maxpool2d backward: argmax index out of range");
    grad[argmax[i]] += grad_output[i];
  }
  return grad;
}

std::size_t transposed_output_extent(std::size_t in, std::size_t kernel,
                                     const TransposedGeometry& g, const char* axis) {
  require(g.stride >= 1, "transposed_conv2d: stride must be positive");
  require(in >= 1, std::string("transposed_conv2d: empty input ") + axis);
  const auto full = static_cast<Index>(g.stride * (in - 1) + kernel);
  const auto out = full - 2 * static_cast<Index>(g.cropping);
  require(out > 0, std::string("transposed_conv2d: non-positive output ") + axis + " (" +
                       std::to_string(out) + ")");
  return static_cast<std::size_t>(out);
}

template <typename T>
Tensor<T> transposed_conv2d_forward(const Tensor<T>& input, const Tensor<T>& kernel,
                                    const TransposedGeometry& g) {
  const Shape& is = input.shape();
  const Shape& ks = kernel.shape();
  require(ks.n == is.c, "transposed_conv2d: " + dim("kernel input channels", ks.n, is.c));
  const std::size_t oh = transposed_output_extent(is.h, ks.h, g, "height");
  const std::size_t ow = transposed_output_extent(is.w, ks.w, g, "width");
  Tensor<T> out({is.n, ks.c, oh, ow});
  // The dense side is the transposed output; the strided side is the input.
  const PlaneGeom pg{Index(oh), Index(ow), Index(is.h), Index(is.w),
                     Index(ks.h), Index(ks.w), Index(g.stride), Index(g.cropping)};
  for (std::size_t b = 0; b < is.n; ++b) {
    for (std::size_t i = 0; i < is.c; ++i) {
      for (std::size_t o = 0; o < ks.c; ++o) {
        scatter_plane(input.plane(b, i), kernel.plane(i, o), out.plane(b, o), pg);
      }
    }
  }
  return out;
}

template <typename T>
TransposedGrads<T> transposed_conv2d_backward(const Tensor<T>& input, const Tensor<T>& kernel,
                                              const Tensor<T>& grad_output,
                                              const TransposedGeometry& g) {
  const Shape& is = input.shape();
  const Shape& ks = kernel.shape();
  require(ks.n == is.c, "transposed_conv2d backward: " + dim("kernel input channels", ks.n, is.c));
  const std::size_t oh = transposed_output_extent(is.h, ks.h, g, "height");
  const std::size_t ow = transposed_output_extent(is.w, ks.w, g, "width");
  const Shape expected{is.n, ks.c, oh, ow};
  require(grad_output.shape() == expected, "transposed_conv2d backward: upstream gradient shape " +
                                               to_string(grad_output.shape()) + ", expected " +
                                               to_string(expected));
  TransposedGrads<T> grads{Tensor<T>(is), Tensor<T>(ks)};
  const PlaneGeom pg{Index(oh), Index(ow), Index(is.h), Index(is.w),
                     Index(ks.h), Index(ks.w), Index(g.stride), Index(g.cropping)};
  for (std::size_t b = 0; b < is.n; ++b) {
    for (std::size_t i = 0; i < is.c; ++i) {
      for (std::size_t o = 0; o < ks.c; ++o) {
        correlate_plane(grad_output.plane(b, o), kernel.plane(i, o), grads.input.plane(b, i), pg);
        kernel_grad_plane(grad_output.plane(b, o), input.plane(b, i), grads.kernel.plane(i, o), pg);
      }
    }
  }
  return grads;
}

template <typename T>
Tensor<T> bilinear_kernel(std::size_t factor, std::size_t channels) {
  require(factor >= 1, "bilinear_kernel: factor must be >= 1");
  require(channels >= 1, "bilinear_kernel: channels must be >= 1");
  const std::size_t k = bilinear_kernel_size(factor);
  const double center = (static_cast<double>(k) - 1.0) / 2.0;
  std::vector<double> profile(k);
  for (std::size_t i = 0; i < k; ++i) {
    profile[i] = 1.0 - std::abs(static_cast<double>(i) - center) / static_cast<double>(factor);
  }
  Tensor<T> kernel({channels, channels, k, k});
  for (std::size_t c = 0; c < channels; ++c) {
    for (std::size_t y = 0; y < k; ++y) {
      for (std::size_t x = 0; x < k; ++x) kernel(c, c, y, x) = static_cast<T>(profile[y] * profile[x]);
    }
  }
  return kernel;
}

template <typename T>
DropoutResult<T> dropout_forward(const Tensor<T>& input, double p, bool train_mode,
                                 std::uint64_t seed) {
  require(p >= 0.0 && p < 1.0, "dropout: probability must be in [0, 1)");
  DropoutResult<T> r{input, std::vector<T>(input.size(), T{1})};
  if (!train_mode || p == 0.0) return r;
  Rng rng(seed);
  const T keep_scale = static_cast<T>(1.0 / (1.0 - p));
  for (std::size_t i = 0; i < input.size(); ++i) {
    const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
    r.mask[i] = u < p ? T{} : keep_scale;
    r.output[i] = input[i] * r.mask[i];
  }
  return r;
}

template <typename T>
Tensor<T> dropout_backward(const Tensor<T>& grad_output, std::span<const T> mask) {
  require(mask.size() == grad_output.size(), "dropout backward: mask size mismatch");
  Tensor<T> g = grad_output;
  for (std::size_t i = 0; i < g.size(); ++i) g[i] *= mask[i];
  return g;
}

template <typename T>
Tensor<T> softmax_channels(const Tensor<T>& logits) {
  const Shape& s = logits.shape();
  require(s.c == 2, "softmax_2class: channel extent " + std::to_string(s.c) + ", expected 2");
  Tensor<T> probs(s);
  for (std::size_t b = 0; b < s.n; ++b) {
    const T* z0 = logits.plane(b, 0);
    const T* z1 = logits.plane(b, 1);
    T* p0 = probs.plane(b, 0);
    T* p1 = probs.plane(b, 1);
    for (std::size_t i = 0; i < s.plane(); ++i) {
      const T m = std::max(z0[i], z1[i]);
      const T e0 = std::exp(z0[i] - m);
      const T e1 = std::exp(z1[i] - m);
      const T denom = e0 + e1;
      p0[i] = e0 / denom;
      p1[i] = e1 / denom;
    }
  }
  return probs;
}

template <typename T>
Tensor<T> softmax_2class(const Tensor<T>& logits) {
  const Tensor<T> probs = softmax_channels(logits);
  const Shape& s = logits.shape();
  Tensor<T> po({s.n, 1, s.h, s.w});
  for (std::size_t b = 0; b < s.n; ++b) {
    std::copy_n(probs.plane(b, kPosidoniaChannel), s.plane(), po.plane(b, 0));
  }
  return po;
}

template <typename T>
CrossEntropyResult<T> cross_entropy(const Tensor<T>& probabilities,
                                    std::span<const std::uint8_t> labels,
                                    std::span<const T> weights) {
  const Shape& s = probabilities.shape();
  require(s.c == 2, "cross_entropy: channel extent " + std::to_string(s.c) + ", expected 2");
  const std::size_t pixels = s.n * s.plane();
  require(labels.size() == pixels,
          "cross_entropy: " + dim("label count", labels.size(), pixels));
  require(weights.empty() || weights.size() == pixels,
          "cross_entropy: " + dim("weight count", weights.size(), pixels));
  CrossEntropyResult<T> r{T{}, Tensor<T>(s)};
  const T inv_n = T{1} / static_cast<T>(pixels);
  double loss = 0.0;
  for (std::size_t b = 0; b < s.n; ++b) {
    const T* p[2] = {probabilities.plane(b, 0), probabilities.plane(b, 1)};
    T* g[2] = {r.logit_grad.plane(b, 0), r.logit_grad.plane(b, 1)};
    for (std::size_t i = 0; i < s.plane(); ++i) {
      const std::size_t px = b * s.plane() + i;
      const std::uint8_t label = labels[px];
      require(label <= 1, "cross_entropy: non-binary label at pixel " + std::to_string(px));
      const T w = weights.empty() ? T{1} : weights[px];
      const double p_true = std::max(static_cast<double>(p[label][i]), kProbabilityFloor);
      loss -= static_cast<double>(w) * std::log(p_true);
      for (std::size_t c = 0; c < 2; ++c) {
        const T onehot = c == label ? T{1} : T{};
        g[c][i] = w * (p[c][i] - onehot) * inv_n;
      }
    }
  }
  r.loss = static_cast<T>(loss / static_cast<double>(pixels));
  return r;
}

#define SEAGRASS_INSTANTIATE_LAYERS(T)                                                           \
  template Tensor<T> conv2d_forward(const Tensor<T>&, const Tensor<T>&, std::span<const T>,     \
                                    const ConvGeometry&);                                       \
  template ConvGrads<T> conv2d_backward(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&,   \
                                        const ConvGeometry&);                                   \
  template Tensor<T> relu_forward(const Tensor<T>&);                                            \
  template Tensor<T> relu_backward(const Tensor<T>&, const Tensor<T>&);                         \
  template MaxPoolResult<T> maxpool2d_forward(const Tensor<T>&);                                \
  template Tensor<T> maxpool2d_backward(const Tensor<T>&, std::span<const std::size_t>,         \
                                        const Shape&);                                          \
  template Tensor<T> transposed_conv2d_forward(const Tensor<T>&, const Tensor<T>&,              \
                                               const TransposedGeometry&);                      \
  template TransposedGrads<T> transposed_conv2d_backward(const Tensor<T>&, const Tensor<T>&,    \
                                                         const Tensor<T>&,                      \
                                                         const TransposedGeometry&);            \
  template Tensor<T> bilinear_kernel(std::size_t, std::size_t);                                 \
  template DropoutResult<T> dropout_forward(const Tensor<T>&, double, bool, std::uint64_t);     \
  template Tensor<T> dropout_backward(const Tensor<T>&, std::span<const T>);                    \
  template Tensor<T> softmax_channels(const Tensor<T>&);                                        \
  template Tensor<T> softmax_2class(const Tensor<T>&);                                          \
  template CrossEntropyResult<T> cross_entropy(const Tensor<T>&, std::span<const std::uint8_t>, \
                                               std::span<const T>);

SEAGRASS_INSTANTIATE_LAYERS(float)
SEAGRASS_INSTANTIATE_LAYERS(double)

}  // namespace seagrass::numerics
