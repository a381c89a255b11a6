#include "seagrass/data/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <random>

#include "seagrass/error.hpp"
#include "seagrass/rng.hpp"

namespace seagrass::data {

namespace {

constexpr int kMaxMaskAttempts = 10000;

struct Bump {
  double cy, cx, radius;
};

struct Wave {
  double ky, kx, phase, amplitude;
};

double uniform(Rng& rng, double lo, double hi) {
  return lo + (hi - lo) * (static_cast<double>(rng() >> 11) * 0x1.0p-53);
}

LabelMap draw_mask(Rng& rng, std::size_t h, std::size_t w, double blob_scale) {
  const double side = static_cast<double>(std::min(h, w));
  for (int attempt = 0; attempt < kMaxMaskAttempts; ++attempt) {
    const int bumps = 2 + static_cast<int>(rng() % 4);
    std::vector<Bump> field;
    for (int b = 0; b < bumps; ++b) {
      field.push_back({uniform(rng, 0.0, static_cast<double>(h)), uniform(rng, 0.0, static_cast<double>(w)),
                       blob_scale * side * uniform(rng, 0.6, 1.4)});
    }
    LabelMap mask(h, w);
    std::size_t positive = 0;
    for (std::size_t y = 0; y < h; ++y) {
      for (std::size_t x = 0; x < w; ++x) {
        double v = 0.0;
        for (const Bump& b : field) {
          const double dy = static_cast<double>(y) + 0.5 - b.cy;
          const double dx = static_cast<double>(x) + 0.5 - b.cx;
          v += std::exp(-(dy * dy + dx * dx) / (2.0 * b.radius * b.radius));
        }
        const std::uint8_t cls = v > 0.5 ? 1 : 0;
        mask.at(y, x) = cls;
        positive += cls;
      }
    }
    const double coverage = static_cast<double>(positive) / static_cast<double>(h * w);
    if (coverage >= kMinCoverage && coverage <= kMaxCoverage) return mask;
  }
  contract_fail("synth: could not draw a blob mask with non-degenerate coverage; check blob_scale");
}

}  // namespace

Sample synth_sample(std::size_t height, std::size_t width, double blob_scale, std::uint64_t seed) {
  require(height >= 4 && width >= 4, "synth: extents too small");
  require(blob_scale > 0.0, "synth: blob_scale must be positive");
  Rng rng(seed);
  std::normal_distribution<double> noise(0.0, 1.0);
  Sample s;
  s.label = draw_mask(rng, height, width, blob_scale);
  s.image = Image(height, width);
  s.meta = {"synthetic", "synth", SetKind::Mix};

  const double gain = uniform(rng, 0.75, 1.05);
  const double side = static_cast<double>(std::min(height, width));
  constexpr double two_pi = 2.0 * std::numbers::pi;

  std::vector<Wave> sand;
  for (int i = 0; i < 3; ++i) {
    const double period = side * uniform(rng, 0.5, 1.5);
    const double angle = uniform(rng, 0.0, std::numbers::pi);
    sand.push_back({std::sin(angle) * two_pi / period, std::cos(angle) * two_pi / period,
                    uniform(rng, 0.0, two_pi), uniform(rng, 0.02, 0.04)});
  }
  const double blade_angle = uniform(rng, 0.0, std::numbers::pi);
  const double blade_period = uniform(rng, 3.0, 5.0);
  const Wave blades{std::sin(blade_angle) * two_pi / blade_period,
                    std::cos(blade_angle) * two_pi / blade_period, uniform(rng, 0.0, two_pi), 0.12};

  constexpr double sand_rgb[3] = {0.78, 0.72, 0.55};
  constexpr double grass_rgb[3] = {0.18, 0.38, 0.24};
  for (std::size_t y = 0; y < height; ++y) {
    for (std::size_t x = 0; x < width; ++x) {
      const double fy = static_cast<double>(y);
      const double fx = static_cast<double>(x);
      const bool grass = s.label.at(y, x) != 0;
      double texture = 0.0;
      if (grass) {
        texture = blades.amplitude * std::sin(blades.ky * fy + blades.kx * fx + blades.phase) +
                  0.04 * noise(rng);
      } else {
        for (const Wave& wv : sand) texture += wv.amplitude * std::sin(wv.ky * fy + wv.kx * fx + wv.phase);
        texture += 0.02 * noise(rng);
      }
      const double* base = grass ? grass_rgb : sand_rgb;
      for (std::size_t c = 0; c < 3; ++c) {
        s.image.at(c, y, x) = static_cast<float>(std::clamp(gain * (base[c] + texture), 0.0, 1.0));
      }
    }
  }
  return s;
}

std::vector<Sample> synth_dataset(std::size_t count, std::size_t height, std::size_t width,
                                  double blob_scale, std::uint64_t seed) {
  std::vector<Sample> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    Sample s = synth_sample(height, width, blob_scale, derive_seed(seed, static_cast<std::uint64_t>(i)));
    char id[32];
    std::snprintf(id, sizeof id, "synth_%04zu", i);
    s.id = id;
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace seagrass::data
