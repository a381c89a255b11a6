#pragma once

// Reference implementations written directly from the definitions, used to check the
// optimized library code. Shared by the unit tests and the acceptance runner.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "seagrass/analysis/uncertainty.hpp"
#include "seagrass/data/raster.hpp"
#include "seagrass/evaluation/metrics.hpp"
#include "seagrass/network/model.hpp"
#include "seagrass/numerics/grad_check.hpp"
#include "seagrass/numerics/layers.hpp"
#include "seagrass/numerics/tensor.hpp"
#include "seagrass/rng.hpp"

namespace seagrass::testing {

using numerics::GradCheckReport;
using numerics::Shape;
using numerics::Tensor;

inline Tensor<double> random_tensor(Shape shape, std::uint64_t seed, double lo = -1.0, double hi = 1.0) {
  Rng rng(seed);
  std::uniform_real_distribution<double> dist(lo, hi);
  Tensor<double> t(shape);
  for (auto& v : t.data()) v = dist(rng);
  return t;
}

inline Tensor<double> from_span(Shape shape, std::span<const double> values) {
  return Tensor<double>(shape, std::vector<double>(values.begin(), values.end()));
}

inline std::vector<double> to_vector(const Tensor<double>& t) { return {t.data().begin(), t.data().end()}; }

// out[b,o,y,x] = bias[o] + sum_{c,i,j} k[o,c,i,j] * in_padded[b,c,y*s+i,x*s+j]
inline Tensor<double> conv_reference(const Tensor<double>& in, const Tensor<double>& k,
                                     std::span<const double> bias, std::size_t stride, std::size_t pad) {
  const Shape is = in.shape();
  const Shape ks = k.shape();
  const std::size_t oh = (is.h + 2 * pad - ks.h) / stride + 1;
  const std::size_t ow = (is.w + 2 * pad - ks.w) / stride + 1;
  Tensor<double> out({is.n, ks.n, oh, ow});
  for (std::size_t b = 0; b < is.n; ++b)
    for (std::size_t o = 0; o < ks.n; ++o)
      for (std::size_t y = 0; y < oh; ++y)
        for (std::size_t x = 0; x < ow; ++x) {
          double acc = bias.empty() ? 0.0 : bias[o];
          for (std::size_t c = 0; c < is.c; ++c)
            for (std::size_t i = 0; i < ks.h; ++i)
              for (std::size_t j = 0; j < ks.w; ++j) {
                const long yy = static_cast<long>(y * stride + i) - static_cast<long>(pad);
                const long xx = static_cast<long>(x * stride + j) - static_cast<long>(pad);
                if (yy < 0 || xx < 0 || yy >= static_cast<long>(is.h) || xx >= static_cast<long>(is.w)) continue;
                acc += k(o, c, i, j) * in(b, c, static_cast<std::size_t>(yy), static_cast<std::size_t>(xx));
              }
          out(b, o, y, x) = acc;
        }
  return out;
}

inline Tensor<double> maxpool_reference(const Tensor<double>& in) {
  const Shape s = in.shape();
  Tensor<double> out({s.n, s.c, s.h / 2, s.w / 2});
  for (std::size_t b = 0; b < s.n; ++b)
    for (std::size_t c = 0; c < s.c; ++c)
      for (std::size_t y = 0; y < s.h / 2; ++y)
        for (std::size_t x = 0; x < s.w / 2; ++x) {
          out(b, c, y, x) = std::max({in(b, c, 2 * y, 2 * x), in(b, c, 2 * y, 2 * x + 1),
                                      in(b, c, 2 * y + 1, 2 * x), in(b, c, 2 * y + 1, 2 * x + 1)});
        }
  return out;
}

/// Half-pixel-centred bilinear sample of one plane at output pixel (u, v) for an integer
/// upsampling factor.
inline double bilinear_sample(const Tensor<double>& in, std::size_t u, std::size_t v, std::size_t factor) {
  const double f = static_cast<double>(factor);
  const double sy = (static_cast<double>(u) + 0.5) / f - 0.5;
  const double sx = (static_cast<double>(v) + 0.5) / f - 0.5;
  const double y0 = std::floor(sy);
  const double x0 = std::floor(sx);
  const double ty = sy - y0;
  const double tx = sx - x0;
  auto at = [&](double y, double x) {
    return in(0, 0, static_cast<std::size_t>(y), static_cast<std::size_t>(x));
  };
  return (1 - ty) * ((1 - tx) * at(y0, x0) + tx * at(y0, x0 + 1)) +
         ty * ((1 - tx) * at(y0 + 1, x0) + tx * at(y0 + 1, x0 + 1));
}

struct NamedCheck {
  std::string name;
  GradCheckReport report;
};

/// Finite-difference checks of every layer's backward pass at 64-bit on small random
/// tensors. Each check differentiates L = <layer(x), r> for a fixed random r.
inline std::vector<NamedCheck> layer_gradient_checks(std::uint64_t seed, double h = 1e-5,
                                                     double tolerance = 1e-4) {
  using namespace numerics;
  std::vector<NamedCheck> out;
  auto seed_for = [&](const char* what) { return derive_seed(seed, what); };

  {  // conv2d, padded and strided
    const Shape xs{1, 2, 5, 5};
    const Shape ks{3, 2, 3, 3};
    const ConvGeometry g{1, 1};
    const auto x = random_tensor(xs, seed_for("conv.x"));
    const auto k = random_tensor(ks, seed_for("conv.k"));
    const std::vector<double> bias{0.1, -0.2, 0.3};
    const auto r = random_tensor(conv2d_forward(x, k, std::span<const double>(bias), g).shape(), seed_for("conv.r"));
    const auto grads = conv2d_backward(x, k, r, g);
    out.push_back({"conv2d input", grad_check([&](std::span<const double> v) {
                                     return dot(conv2d_forward(from_span(xs, v), k, std::span<const double>(bias), g), r);
                                   }, to_vector(x), grads.input.data(), h, tolerance)});
    out.push_back({"conv2d kernel", grad_check([&](std::span<const double> v) {
                                      return dot(conv2d_forward(x, from_span(ks, v), std::span<const double>(bias), g), r);
                                    }, to_vector(k), grads.kernel.data(), h, tolerance)});
    out.push_back({"conv2d bias", grad_check([&](std::span<const double> v) {
                                    return dot(conv2d_forward(x, k, v, g), r);
                                  }, bias, grads.bias, h, tolerance)});
    const ConvGeometry s2{2, 0};
    const auto r2 = random_tensor(conv2d_forward(x, k, std::span<const double>(bias), s2).shape(), seed_for("conv.r2"));
    const auto g2 = conv2d_backward(x, k, r2, s2);
    out.push_back({"conv2d input, stride 2", grad_check([&](std::span<const double> v) {
                                               return dot(conv2d_forward(from_span(xs, v), k, std::span<const double>(bias), s2), r2);
                                             }, to_vector(x), g2.input.data(), h, tolerance)});
  }
  {  // relu away from the kink
    const Shape xs{1, 2, 4, 4};
    auto x = random_tensor(xs, seed_for("relu.x"));
    for (auto& v : x.data()) {
      if (std::abs(v) < 1e-3) v = 0.5;
    }
    const auto r = random_tensor(xs, seed_for("relu.r"));
    const auto g = relu_backward(x, r);
    out.push_back({"relu", grad_check([&](std::span<const double> v) { return dot(relu_forward(from_span(xs, v)), r); },
                                      to_vector(x), g.data(), h, tolerance)});
  }
  {  // maxpool
    const Shape xs{1, 1, 6, 6};
    const auto x = random_tensor(xs, seed_for("pool.x"));
    const auto fwd = maxpool2d_forward(x);
    const auto r = random_tensor(fwd.output.shape(), seed_for("pool.r"));
    const auto g = maxpool2d_backward(r, std::span<const std::size_t>(fwd.argmax), xs);
    out.push_back({"maxpool2d", grad_check([&](std::span<const double> v) {
                                  return dot(maxpool2d_forward(from_span(xs, v)).output, r);
                                }, to_vector(x), g.data(), h, tolerance)});
  }
  {  // transposed conv with cropping
    const Shape xs{1, 2, 3, 3};
    const Shape ks{2, 3, 4, 4};
    const TransposedGeometry g{2, 1};
    const auto x = random_tensor(xs, seed_for("tconv.x"));
    const auto k = random_tensor(ks, seed_for("tconv.k"));
    const auto r = random_tensor(transposed_conv2d_forward(x, k, g).shape(), seed_for("tconv.r"));
    const auto grads = transposed_conv2d_backward(x, k, r, g);
    out.push_back({"transposed_conv2d input", grad_check([&](std::span<const double> v) {
                                                return dot(transposed_conv2d_forward(from_span(xs, v), k, g), r);
                                              }, to_vector(x), grads.input.data(), h, tolerance)});
    out.push_back({"transposed_conv2d kernel", grad_check([&](std::span<const double> v) {
                                                 return dot(transposed_conv2d_forward(x, from_span(ks, v), g), r);
                                               }, to_vector(k), grads.kernel.data(), h, tolerance)});
  }
  {  // dropout with a fixed mask
    const Shape xs{1, 3, 4, 4};
    const auto x = random_tensor(xs, seed_for("dropout.x"));
    const auto r = random_tensor(xs, seed_for("dropout.r"));
    const std::uint64_t mask_seed = seed_for("dropout.mask");
    const auto fwd = dropout_forward(x, 0.5, true, mask_seed);
    const auto g = dropout_backward(r, std::span<const double>(fwd.mask));
    out.push_back({"dropout mask", grad_check([&](std::span<const double> v) {
                                     return dot(dropout_forward(from_span(xs, v), 0.5, true, mask_seed).output, r);
                                   }, to_vector(x), g.data(), h, tolerance)});
  }
  {  // softmax + cross-entropy on a 4x4 map
    const Shape zs{1, 2, 4, 4};
    const auto z = random_tensor(zs, seed_for("ce.z"), -3.0, 3.0);
    Rng rng(seed_for("ce.labels"));
    std::vector<std::uint8_t> labels(16);
    for (auto& l : labels) l = static_cast<std::uint8_t>(rng() & 1u);
    const auto ce = cross_entropy(softmax_channels(z), std::span<const std::uint8_t>(labels));
    out.push_back({"softmax + cross-entropy", grad_check([&](std::span<const double> v) {
                                                return cross_entropy(softmax_channels(from_span(zs, v)),
                                                                     std::span<const std::uint8_t>(labels))
                                                    .loss;
                                              }, to_vector(z), ce.logit_grad.data(), h, tolerance)});
  }
  return out;
}

/// End-to-end check of the network's backward pass: dLoss/dparam for `probes` randomly
/// chosen parameters of a 32x32 toy model, 64-bit, dropout active with a fixed mask seed.
inline GradCheckReport network_gradient_check(std::uint64_t seed, std::size_t probes, double h = 1e-6,
                                              double tolerance = 1e-3) {
  using namespace network;
  ModelT<double> model(NetworkConfig::toy(32, 32, 16), derive_seed(seed, "init"));
  Image image(32, 32);
  LabelMap labels(32, 32);
  {
    Rng rng(derive_seed(seed, "image"));
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (auto& v : image.pixels) v = static_cast<float>(u(rng));
    for (std::size_t y = 0; y < 32; ++y)
      for (std::size_t x = 0; x < 32; ++x) labels.at(y, x) = (x + y) < 32 ? 1 : 0;
  }
  const std::uint64_t dropout_seed = derive_seed(seed, "dropout");

  const auto pass = forward(model, image, true, dropout_seed);
  backward(model, pass.cache, labels);
  std::vector<double> point;
  std::vector<double> analytic;
  for (const auto& p : model.params()) {
    point.insert(point.end(), p.value.data().begin(), p.value.data().end());
    analytic.insert(analytic.end(), p.grad.data().begin(), p.grad.data().end());
  }

  // Probe uniformly among parameters with a non-negligible gradient; tiny gradients are
  // dominated by the round-off of the central difference.
  std::vector<std::size_t> candidates;
  for (std::size_t i = 0; i < analytic.size(); ++i) {
    if (std::abs(analytic[i]) > 1e-6) candidates.push_back(i);
  }
  Rng rng(derive_seed(seed, "probes"));
  std::shuffle(candidates.begin(), candidates.end(), rng);
  candidates.resize(std::min(probes, candidates.size()));

  const std::vector<std::uint8_t> flat(labels.classes.begin(), labels.classes.end());
  auto loss_at = [&](std::span<const double> v) {
    std::size_t offset = 0;
    for (auto& p : model.params()) {
      std::copy_n(v.begin() + static_cast<std::ptrdiff_t>(offset), p.value.size(), p.value.data().begin());
      offset += p.value.size();
    }
    model.mark_updated();
    const auto fwd = forward(model, image, true, dropout_seed);
    return numerics::cross_entropy(fwd.probabilities, std::span<const std::uint8_t>(flat)).loss;
  };
  return numerics::grad_check(loss_at, point, analytic, h, tolerance, candidates);
}

/// AUC by direct enumeration: per threshold, recall and fall-out counted pixel by pixel,
/// closed with (0,0) and (1,1), trapezoid over points sorted by (fallOut, recall).
inline double brute_force_auc(std::span<const double> thresholds, std::span<const ProbabilityMap> probs,
                              std::span<const LabelMap> truths) {
  std::vector<std::pair<double, double>> pts{{0.0, 0.0}, {1.0, 1.0}};
  for (double t : thresholds) {
    double tp = 0, fp = 0, tn = 0, fn = 0;
    for (std::size_t m = 0; m < probs.size(); ++m) {
      for (std::size_t i = 0; i < probs[m].values.size(); ++i) {
        const bool pred = probs[m].values[i] >= t;
        const bool truth = truths[m].classes[i] != 0;
        if (pred && truth) tp += 1;
        if (pred && !truth) fp += 1;
        if (!pred && !truth) tn += 1;
        if (!pred && truth) fn += 1;
      }
    }
    pts.emplace_back(fp / (fp + tn), tp / (tp + fn));
  }
  std::sort(pts.begin(), pts.end());
  double area = 0.0;
  for (std::size_t i = 1; i < pts.size(); ++i) {
    area += (pts[i].first - pts[i - 1].first) * (pts[i].second + pts[i - 1].second) / 2.0;
  }
  return area;
}

/// A confusion fixture with the exact rational values of its metrics.
struct MetricFixture {
  evaluation::ConfusionCounts counts;
  double accuracy, precision, recall, fall_out, trade_off;
};

/// Twenty-plus hand-constructed count sets, including every degenerate denominator.
inline std::vector<MetricFixture> metric_fixtures() {
  struct C { std::uint64_t tp, fp, tn, fn; };
  const std::vector<C> raw{{50, 10, 30, 10}, {1, 0, 0, 0},   {0, 1, 0, 0},   {0, 0, 1, 0},   {0, 0, 0, 1},
                           {3, 1, 4, 1},    {5, 9, 2, 6},   {100, 0, 100, 0}, {0, 100, 0, 100}, {7, 3, 0, 0},
                           {0, 0, 7, 3},    {2, 2, 2, 2},   {999, 1, 1, 999}, {12, 7, 45, 3}, {1, 2, 3, 4},
                           {4, 3, 2, 1},    {0, 5, 5, 0},   {5, 0, 0, 5},   {17, 19, 23, 29}, {1000000, 3, 7, 11},
                           {6, 0, 9, 0},    {0, 0, 0, 0}};
  std::vector<MetricFixture> out;
  for (const auto& c : raw) {
    const double tp = static_cast<double>(c.tp), fp = static_cast<double>(c.fp);
    const double tn = static_cast<double>(c.tn), fn = static_cast<double>(c.fn);
    const double total = tp + fp + tn + fn;
    MetricFixture f{{c.tp, c.fp, c.tn, c.fn}, 0, 0, 0, 0, 0};
    f.accuracy = total > 0 ? (tp + tn) / total : 0.0;
    f.precision = tp + fp > 0 ? tp / (tp + fp) : 0.0;
    f.recall = tp + fn > 0 ? tp / (tp + fn) : 1.0;
    f.fall_out = fp + tn > 0 ? fp / (fp + tn) : 0.0;
    f.trade_off = (f.recall + (1.0 - f.fall_out)) / 2.0;
    out.push_back(f);
  }
  return out;
}

/// 10x10 maps whose hand-placed regions give tp=50, fp=10, tn=30, fn=10: rows 0-4 are
/// predicted and true P.O., row 5 is predicted only, rows 6-8 are neither, row 9 is true only.
inline std::pair<LabelMap, LabelMap> hand_counted_maps() {
  LabelMap pred(10, 10), truth(10, 10);
  for (std::size_t y = 0; y < 10; ++y)
    for (std::size_t x = 0; x < 10; ++x) {
      pred.at(y, x) = y <= 5 ? 1 : 0;
      truth.at(y, x) = (y <= 4 || y == 9) ? 1 : 0;
    }
  return {pred, truth};
}

struct ErrorFractionFixture {
  LabelMap predicted, truth;
  analysis::UncertaintyMap uncertainty;
};

/// 10x10 maps with exactly 10 misclassified pixels (row 0, columns 0-9), of which the
/// uncertain region covers the first 6. The region also covers 14 correct pixels in row 1.
inline ErrorFractionFixture error_fraction_fixture() {
  ErrorFractionFixture f{LabelMap(10, 10), LabelMap(10, 10), {10, 10, std::vector<std::uint8_t>(100, 0), 0.0}};
  for (std::size_t x = 0; x < 10; ++x) {
    f.truth.at(0, x) = 1;
    f.predicted.at(5, x) = f.truth.at(5, x) = 1;
  }
  for (std::size_t x = 0; x < 6; ++x) f.uncertainty.uncertain[x] = 1;
  for (std::size_t i = 10; i < 24; ++i) f.uncertainty.uncertain[i] = 1;
  f.uncertainty.area_fraction = 0.2;
  return f;
}

}  // namespace seagrass::testing
