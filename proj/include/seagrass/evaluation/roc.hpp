#pragma once

#include <span>
#include <vector>

#include "seagrass/data/raster.hpp"
#include "seagrass/evaluation/metrics.hpp"

namespace seagrass::evaluation {

struct RocPoint {
  double threshold = 0.0;
  double fall_out = 0.0;
  double recall = 0.0;
};

/// One point per grid threshold (grid order) plus the trapezoidal area under the curve
/// closed with (0, 0) and (1, 1).
struct RocCurve {
  std::vector<RocPoint> points;
  double auc = 0.0;
};

/// Trapezoid area of `points` plus the (0,0) and (1,1) endpoints, sorted by fall-out and
/// then recall.
double trapezoid_auc(std::span<const RocPoint> points);

RocCurve make_curve(std::vector<RocPoint> points);

/// Confusion counts per threshold, pooled over every pixel of every map.
std::vector<ConfusionCounts> pooled_counts(const ThresholdGrid& grid,
                                           std::span<const ProbabilityMap> probabilities,
                                           std::span<const LabelMap> truths);

/// ROC over pooled pixels. Requires at least one positive and one negative truth pixel.
RocCurve roc(const ThresholdGrid& grid, std::span<const ProbabilityMap> probabilities,
             std::span<const LabelMap> truths);
RocCurve roc(const ThresholdGrid& grid, const ProbabilityMap& probabilities, const LabelMap& truth);

}  // namespace seagrass::evaluation
