#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "seagrass/data/raster.hpp"

namespace seagrass::analysis {

/// Overlay colors: false negatives pure blue, false positives pure green.
inline constexpr float kFalseNegativeRgb[3] = {0.0f, 0.0f, 1.0f};
inline constexpr float kFalsePositiveRgb[3] = {0.0f, 1.0f, 0.0f};

/// Copy of `image` with FN pixels replaced by blue and FP pixels by green.
Image error_overlay(const Image& image, const LabelMap& predicted, const LabelMap& truth);

/// Label maps drawn by several annotators for one image; at least two.
struct AnnotatorSet {
  std::vector<LabelMap> maps;

  void validate() const;
};

struct UncertaintyMap {
  std::size_t height = 0;
  std::size_t width = 0;
  std::vector<std::uint8_t> uncertain;  // 1 = uncertain
  double area_fraction = 0.0;

  std::size_t uncertain_count() const;
};

/// Per-pixel mean of the binary annotator labels.
GrayMap annotator_mean(const AnnotatorSet& set);

/// Uncertain where the annotators disagree.
UncertaintyMap annotator_uncertainty(const AnnotatorSet& set);

inline constexpr double kLowThreshold = 0.01;
inline constexpr double kHighThreshold = 0.99;

/// Uncertain where binarizing at `low` and at `high` disagree, i.e. low <= p < high.
UncertaintyMap network_uncertainty(const ProbabilityMap& probabilities, double low = kLowThreshold,
                                   double high = kHighThreshold);

struct ErrorFraction {
  double value = 1.0;
  bool degenerate = false;  // no misclassified pixels
  std::size_t misclassified = 0;
  std::size_t inside = 0;
};

/// |misclassified and uncertain| / |misclassified|; 1.0 with the degenerate flag when
/// nothing is misclassified.
ErrorFraction error_in_uncertainty_fraction(const LabelMap& predicted, const LabelMap& truth,
                                            const UncertaintyMap& uncertainty);

/// Uncertain pixels as a 0/1 grey map for PGM export.
GrayMap to_gray(const UncertaintyMap& map);

}  // namespace seagrass::analysis
