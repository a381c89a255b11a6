#include "seagrass/evaluation/roc.hpp"

#include <algorithm>

#include "seagrass/error.hpp"

namespace seagrass::evaluation {

double trapezoid_auc(std::span<const RocPoint> points) {
  std::vector<RocPoint> curve(points.begin(), points.end());
  curve.push_back({1.0, 0.0, 0.0});
  curve.push_back({0.0, 1.0, 1.0});
  std::sort(curve.begin(), curve.end(), [](const RocPoint& a, const RocPoint& b) {
    return a.fall_out != b.fall_out ? a.fall_out < b.fall_out : a.recall < b.recall;
  });
  double area = 0.0;
  for (std::size_t i = 1; i < curve.size(); ++i) {
    area += (curve[i].fall_out - curve[i - 1].fall_out) * (curve[i].recall + curve[i - 1].recall) / 2.0;
  }
  return area;
}

RocCurve make_curve(std::vector<RocPoint> points) {
  RocCurve c;
  c.auc = trapezoid_auc(points);
  c.points = std::move(points);
  return c;
}

std::vector<ConfusionCounts> pooled_counts(const ThresholdGrid& grid,
                                           std::span<const ProbabilityMap> probabilities,
                                           std::span<const LabelMap> truths) {
  grid.validate();
  require(probabilities.size() == truths.size(), "roc: probability/truth map counts differ");
  std::vector<ConfusionCounts> counts(grid.size());
  for (std::size_t m = 0; m < probabilities.size(); ++m) {
    require(same_extents(probabilities[m], truths[m]), "roc: map " + std::to_string(m) + " extents differ");
    for (std::size_t j = 0; j < grid.size(); ++j) {
      counts[j] += confusion(binarize(probabilities[m], grid.thresholds[j]), truths[m]);
    }
  }
  return counts;
}

RocCurve roc(const ThresholdGrid& grid, std::span<const ProbabilityMap> probabilities,
             std::span<const LabelMap> truths) {
  const auto counts = pooled_counts(grid, probabilities, truths);
  const ConfusionCounts& any = counts.front();
  require(any.tp + any.fn > 0, "roc: ground truth has no positive pixels (recall undefined)");
  require(any.fp + any.tn > 0, "roc: ground truth has no negative pixels (fall-out undefined)");
  std::vector<RocPoint> points;
  for (std::size_t j = 0; j < grid.size(); ++j) {
    const MetricSet m = metrics(counts[j]);
    points.push_back({grid.thresholds[j], m.fall_out, m.recall});
  }
  return make_curve(std::move(points));
}

RocCurve roc(const ThresholdGrid& grid, const ProbabilityMap& probabilities, const LabelMap& truth) {
  return roc(grid, std::span<const ProbabilityMap>(&probabilities, 1), std::span<const LabelMap>(&truth, 1));
}

}  // namespace seagrass::evaluation
