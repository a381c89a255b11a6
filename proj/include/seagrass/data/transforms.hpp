#pragma once

#include <cstdint>

#include "seagrass/data/raster.hpp"

namespace seagrass::data {

/// Box-average (area-weighted) resampling to the target extents. Handles fractional
/// scale factors; integer decimation reduces to plain block means.
Image preprocess(const Image& image, std::size_t target_height, std::size_t target_width);

/// Uniform ranges for photometric augmentation.
/// brightness: additive delta in units of the [0, 1] dynamic range.
/// contrast: multiplicative factor about each channel's mean.
struct AugmentationConfig {
  double brightness_min = -0.2;
  double brightness_max = 0.2;
  double contrast_min = 0.8;
  double contrast_max = 1.2;

  void validate() const;
};

/// out = clamp(mean + gamma * (pixel - mean) + delta, 0, 1) per channel, with gamma and
/// delta drawn once per image.
Image augment(const Image& image, const AugmentationConfig& config, std::uint64_t seed);

/// Zero padding applied around an image so both extents become multiples of `multiple`.
struct Padding {
  std::size_t top = 0;
  std::size_t bottom = 0;
  std::size_t left = 0;
  std::size_t right = 0;
};

Padding padding_for(std::size_t height, std::size_t width, std::size_t multiple);
Image pad(const Image& image, const Padding& padding);
LabelMap pad(const LabelMap& labels, const Padding& padding);
ProbabilityMap crop(const ProbabilityMap& map, const Padding& padding);

}  // namespace seagrass::data
