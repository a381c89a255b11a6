#pragma once

#include <cstdint>
#include <vector>

#include "seagrass/data/dataset.hpp"

namespace seagrass::data {

inline constexpr double kDefaultBlobScale = 0.25;
inline constexpr double kMinCoverage = 0.2;
inline constexpr double kMaxCoverage = 0.8;

/// One seeded two-texture composite: smooth low-frequency "sand" background with
/// directional high-frequency "seagrass" texture inside smooth random blobs. The label
/// is the exact blob mask; masks with P.O. coverage outside [0.2, 0.8] are redrawn.
/// blob_scale sets the blob radius as a fraction of the shorter image side.
Sample synth_sample(std::size_t height, std::size_t width, double blob_scale, std::uint64_t seed);

/// `count` samples with ids synth_0000, synth_0001, ...; sample i uses a seed derived
/// from (seed, i).
std::vector<Sample> synth_dataset(std::size_t count, std::size_t height, std::size_t width,
                                  double blob_scale, std::uint64_t seed);

}  // namespace seagrass::data
