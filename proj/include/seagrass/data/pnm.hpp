#pragma once

#include <filesystem>
#include <span>
#include <stdexcept>

#include "seagrass/data/raster.hpp"

namespace seagrass::data {

class PnmError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Binary PPM (P6). Values are quantized to maxval 255.
void write_ppm(const std::filesystem::path& path, const Image& image);
Image read_ppm(const std::filesystem::path& path);

/// Binary PGM (P5). maxval 255 or 65535 (big-endian 16-bit samples).
void write_pgm(const std::filesystem::path& path, std::size_t height, std::size_t width,
               std::span<const float> values, unsigned maxval = 255);
GrayMap read_pgm(const std::filesystem::path& path);

/// Label maps are stored P.O. = 255, background = 0.
void write_label_pgm(const std::filesystem::path& path, const LabelMap& labels);
LabelMap read_label_pgm(const std::filesystem::path& path);

/// Probability maps are stored at 16 bits to keep threshold decisions stable on reload.
void write_probability_pgm(const std::filesystem::path& path, const ProbabilityMap& map);
ProbabilityMap read_probability_pgm(const std::filesystem::path& path);

}  // namespace seagrass::data
