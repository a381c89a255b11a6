#include "seagrass/data/transforms.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <random>
#include <vector>

#include "seagrass/error.hpp"
#include "seagrass/rng.hpp"

namespace seagrass::data {

namespace {

struct Tap {
  std::size_t src;
  double weight;
};

// Overlap of each output cell [o*scale, (o+1)*scale) with the unit source cells.
std::vector<std::vector<Tap>> box_taps(std::size_t src, std::size_t dst) {
  std::vector<std::vector<Tap>> taps(dst);
  const double scale = static_cast<double>(src) / static_cast<double>(dst);
  for (std::size_t o = 0; o < dst; ++o) {
    const double lo = static_cast<double>(o) * scale;
    const double hi = static_cast<double>(o + 1) * scale;
    const auto first = static_cast<std::size_t>(std::floor(lo));
    const auto last = std::min(src, static_cast<std::size_t>(std::ceil(hi)));
    for (std::size_t s = first; s < last; ++s) {
      const double w = std::min(hi, static_cast<double>(s + 1)) - std::max(lo, static_cast<double>(s));
      if (w > 0.0) taps[o].push_back({s, w});
    }
  }
  return taps;
}

}  // namespace

Image preprocess(const Image& image, std::size_t target_height, std::size_t target_width) {
  require(target_height > 0 && target_width > 0, "preprocess: target extents must be positive");
  require(image.height > 0 && image.width > 0, "preprocess: empty image");
  if (image.height == target_height && image.width == target_width) return image;
  const auto ty = box_taps(image.height, target_height);
  const auto tx = box_taps(image.width, target_width);
  Image out(target_height, target_width);
  for (std::size_t c = 0; c < Image::kChannels; ++c) {
    for (std::size_t y = 0; y < target_height; ++y) {
      for (std::size_t x = 0; x < target_width; ++x) {
        double acc = 0.0;
        double norm = 0.0;
        for (const Tap& a : ty[y]) {
          for (const Tap& b : tx[x]) {
            const double w = a.weight * b.weight;
            acc += w * image.at(c, a.src, b.src);
            norm += w;
          }
        }
        out.at(c, y, x) = std::clamp(static_cast<float>(acc / norm), 0.0f, 1.0f);
      }
    }
  }
  return out;
}

void AugmentationConfig::validate() const {
  require(std::isfinite(brightness_min) && std::isfinite(brightness_max) &&
              brightness_min <= brightness_max,
          "augmentation: brightness range must be finite and ordered");
  require(std::isfinite(contrast_min) && std::isfinite(contrast_max) && contrast_min > 0.0 &&
              contrast_min <= contrast_max,
          "augmentation: contrast range must be positive and ordered");
}

Image augment(const Image& image, const AugmentationConfig& config, std::uint64_t seed) {
  config.validate();
  Rng rng(seed);
  auto draw = [&rng](double lo, double hi) {
    const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
    return lo + (hi - lo) * u;
  };
  const double gamma = draw(config.contrast_min, config.contrast_max);
  const double delta = draw(config.brightness_min, config.brightness_max);
  Image out = image;
  const std::size_t plane = image.pixel_count();
  if (plane == 0) return out;
  for (std::size_t c = 0; c < Image::kChannels; ++c) {
    const float* src = image.pixels.data() + c * plane;
    float* dst = out.pixels.data() + c * plane;
    double mean = 0.0;
    for (std::size_t i = 0; i < plane; ++i) mean += src[i];
    mean /= static_cast<double>(plane);
    for (std::size_t i = 0; i < plane; ++i) {
      const double v = mean + gamma * (src[i] - mean) + delta;
      dst[i] = static_cast<float>(std::clamp(v, 0.0, 1.0));
    }
  }
  return out;
}

Padding padding_for(std::size_t height, std::size_t width, std::size_t multiple) {
  require(multiple >= 1, "padding_for: multiple must be positive");
  auto split = [multiple](std::size_t extent, std::size_t& before, std::size_t& after) {
    const std::size_t target = (extent + multiple - 1) / multiple * multiple;
    const std::size_t extra = target - extent;
    before = extra / 2;
    after = extra - before;
  };
  Padding p;
  split(height, p.top, p.bottom);
  split(width, p.left, p.right);
  return p;
}

Image pad(const Image& image, const Padding& p) {
  Image out(image.height + p.top + p.bottom, image.width + p.left + p.right);
  for (std::size_t c = 0; c < Image::kChannels; ++c) {
    for (std::size_t y = 0; y < image.height; ++y) {
      for (std::size_t x = 0; x < image.width; ++x) out.at(c, y + p.top, x + p.left) = image.at(c, y, x);
    }
  }
  return out;
}

LabelMap pad(const LabelMap& labels, const Padding& p) {
  LabelMap out(labels.height + p.top + p.bottom, labels.width + p.left + p.right);
  for (std::size_t y = 0; y < labels.height; ++y) {
    for (std::size_t x = 0; x < labels.width; ++x) out.at(y + p.top, x + p.left) = labels.at(y, x);
  }
  return out;
}

ProbabilityMap crop(const ProbabilityMap& map, const Padding& p) {
  require(map.height >= p.top + p.bottom && map.width >= p.left + p.right,
          "crop: padding exceeds map extents");
  ProbabilityMap out(map.height - p.top - p.bottom, map.width - p.left - p.right);
  for (std::size_t y = 0; y < out.height; ++y) {
    for (std::size_t x = 0; x < out.width; ++x) out.at(y, x) = map.at(y + p.top, x + p.left);
  }
  return out;
}

}  // namespace seagrass::data
