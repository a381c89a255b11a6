#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "seagrass/data/raster.hpp"

namespace seagrass::evaluation {

/// Ordered binarization thresholds, strictly increasing, each in (0, 1).
struct ThresholdGrid {
  std::vector<double> thresholds;

  /// The nine values 0.1, 0.2, ..., 0.9.
  static ThresholdGrid standard();
  /// Comma-separated list, e.g. "0.25,0.5,0.75".
  static ThresholdGrid parse(const std::string& text);
  void validate() const;
  std::size_t size() const { return thresholds.size(); }
};

struct ConfusionCounts {
  std::uint64_t tp = 0;
  std::uint64_t fp = 0;
  std::uint64_t tn = 0;
  std::uint64_t fn = 0;

  std::uint64_t total() const { return tp + fp + tn + fn; }
  ConfusionCounts& operator+=(const ConfusionCounts& o) {
    tp += o.tp;
    fp += o.fp;
    tn += o.tn;
    fn += o.fn;
    return *this;
  }
  friend bool operator==(const ConfusionCounts&, const ConfusionCounts&) = default;
};

/// Which ratios hit a zero denominator and took their convention value.
struct DegenerateFlags {
  bool accuracy = false;   // empty count set -> 0
  bool precision = false;  // tp + fp == 0 -> 0
  bool recall = false;     // tp + fn == 0 -> 1
  bool fall_out = false;   // fp + tn == 0 -> 0

  bool any() const { return accuracy || precision || recall || fall_out; }
};

struct MetricSet {
  double accuracy = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double fall_out = 0.0;
  double trade_off = 0.0;
  DegenerateFlags degenerate{};
};

/// (recall + (1 - fall-out)) / 2
double trade_off(double recall, double fall_out);

/// Pixel is P.O. iff p >= threshold.
LabelMap binarize(const ProbabilityMap& probabilities, double threshold);

ConfusionCounts confusion(const LabelMap& predicted, const LabelMap& truth);

MetricSet metrics(const ConfusionCounts& counts);

struct OptimalThreshold {
  std::size_t index = 0;
  double trade_off = 0.0;
};

/// Highest trade-off; ties resolve to the lowest index (lowest threshold).
OptimalThreshold optimal_threshold(std::span<const MetricSet> per_threshold);
OptimalThreshold optimal_threshold(std::span<const double> trade_offs);

struct SummaryStats {
  double mean = 0.0;
  double std = 0.0;  // sample standard deviation (n - 1)
};

/// Mean and sample standard deviation of repeated-run values; needs at least two.
SummaryStats aggregate_stats(std::span<const double> values);

}  // namespace seagrass::evaluation
