#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace seagrass {

/// Three-channel image, planar (channel, row, column), values in [0, 1].
struct Image {
  static constexpr std::size_t kChannels = 3;

  std::size_t height = 0;
  std::size_t width = 0;
  std::vector<float> pixels;

  Image() = default;
  Image(std::size_t h, std::size_t w, float fill = 0.0f)
      : height(h), width(w), pixels(kChannels * h * w, fill) {}

  float& at(std::size_t c, std::size_t y, std::size_t x) { return pixels[(c * height + y) * width + x]; }
  float at(std::size_t c, std::size_t y, std::size_t x) const {
    return pixels[(c * height + y) * width + x];
  }
  std::size_t pixel_count() const { return height * width; }
  friend bool operator==(const Image&, const Image&) = default;
};

enum class PixelClass : std::uint8_t { Background = 0, Posidonia = 1 };

/// Per-pixel binary class map, row-major.
struct LabelMap {
  std::size_t height = 0;
  std::size_t width = 0;
  std::vector<std::uint8_t> classes;

  LabelMap() = default;
  LabelMap(std::size_t h, std::size_t w, std::uint8_t fill = 0)
      : height(h), width(w), classes(h * w, fill) {}

  std::uint8_t& at(std::size_t y, std::size_t x) { return classes[y * width + x]; }
  std::uint8_t at(std::size_t y, std::size_t x) const { return classes[y * width + x]; }
  std::size_t pixel_count() const { return height * width; }
  friend bool operator==(const LabelMap&, const LabelMap&) = default;
};

/// Per-pixel P.O.-class probability, row-major.
struct ProbabilityMap {
  std::size_t height = 0;
  std::size_t width = 0;
  std::vector<float> values;

  ProbabilityMap() = default;
  ProbabilityMap(std::size_t h, std::size_t w, float fill = 0.0f)
      : height(h), width(w), values(h * w, fill) {}

  float& at(std::size_t y, std::size_t x) { return values[y * width + x]; }
  float at(std::size_t y, std::size_t x) const { return values[y * width + x]; }
  std::size_t pixel_count() const { return height * width; }
  friend bool operator==(const ProbabilityMap&, const ProbabilityMap&) = default;
};

/// Single-channel real map in [0, 1] (annotator mean grey level, decoded PGM).
struct GrayMap {
  std::size_t height = 0;
  std::size_t width = 0;
  std::vector<float> values;

  GrayMap() = default;
  GrayMap(std::size_t h, std::size_t w, float fill = 0.0f)
      : height(h), width(w), values(h * w, fill) {}

  float& at(std::size_t y, std::size_t x) { return values[y * width + x]; }
  float at(std::size_t y, std::size_t x) const { return values[y * width + x]; }
  std::size_t pixel_count() const { return height * width; }
  friend bool operator==(const GrayMap&, const GrayMap&) = default;
};

template <typename A, typename B>
bool same_extents(const A& a, const B& b) {
  return a.height == b.height && a.width == b.width;
}

/// Label binarization rule for decoded grey levels: strictly above 0.5 is P.O.
LabelMap binarize_gray(const GrayMap& gray);

}  // namespace seagrass
