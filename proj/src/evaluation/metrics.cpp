#include "seagrass/evaluation/metrics.hpp"

#include <cmath>
#include <sstream>

#include "seagrass/error.hpp"

namespace seagrass::evaluation {

ThresholdGrid ThresholdGrid::standard() {
  ThresholdGrid g;
  for (int j = 1; j <= 9; ++j) g.thresholds.push_back(j / 10.0);
  return g;
}

ThresholdGrid ThresholdGrid::parse(const std::string& text) {
  ThresholdGrid g;
  std::istringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      contract_fail("threshold grid: cannot parse '" + item + "'");
    }
    require(item.find_first_not_of(" \t", used) == std::string::npos,
            "threshold grid: cannot parse '" + item + "'");
    g.thresholds.push_back(v);
  }
  g.validate();
  return g;
}

void ThresholdGrid::validate() const {
  require(!thresholds.empty(), "threshold grid: empty");
  for (std::size_t i = 0; i < thresholds.size(); ++i) {
    require(thresholds[i] > 0.0 && thresholds[i] < 1.0, "threshold grid: values must lie in (0, 1)");
    require(i == 0 || thresholds[i] > thresholds[i - 1], "threshold grid: values must strictly increase");
  }
}

double trade_off(double recall, double fall_out) { return (recall + (1.0 - fall_out)) / 2.0; }

LabelMap binarize(const ProbabilityMap& probabilities, double threshold) {
  require(threshold > 0.0 && threshold < 1.0, "binarize: threshold must lie in (0, 1)");
  LabelMap out(probabilities.height, probabilities.width);
  for (std::size_t i = 0; i < probabilities.values.size(); ++i) {
    out.classes[i] = static_cast<double>(probabilities.values[i]) >= threshold ? 1 : 0;
  }
  return out;
}

ConfusionCounts confusion(const LabelMap& predicted, const LabelMap& truth) {
  require(same_extents(predicted, truth), "confusion: prediction " + std::to_string(predicted.height) +
                                              "x" + std::to_string(predicted.width) + " vs truth " +
                                              std::to_string(truth.height) + "x" +
                                              std::to_string(truth.width));
  ConfusionCounts c;
  for (std::size_t i = 0; i < truth.classes.size(); ++i) {
    const bool p = predicted.classes[i] != 0;
    const bool t = truth.classes[i] != 0;
    if (p && t) ++c.tp;
    else if (p) ++c.fp;
    else if (t) ++c.fn;
    else ++c.tn;
  }
  return c;
}

MetricSet metrics(const ConfusionCounts& c) {
  auto ratio = [](std::uint64_t num, std::uint64_t den) {
    return static_cast<double>(num) / static_cast<double>(den);
  };
  MetricSet m;
  if (c.total() == 0) {
    m.degenerate.accuracy = true;
  } else {
    m.accuracy = ratio(c.tp + c.tn, c.total());
  }
  if (c.tp + c.fp == 0) {
    m.degenerate.precision = true;
  } else {
    m.precision = ratio(c.tp, c.tp + c.fp);
  }
  if (c.tp + c.fn == 0) {
    m.recall = 1.0;
    m.degenerate.recall = true;
  } else {
    m.recall = ratio(c.tp, c.tp + c.fn);
  }
  if (c.fp + c.tn == 0) {
    m.degenerate.fall_out = true;
  } else {
    m.fall_out = ratio(c.fp, c.fp + c.tn);
  }
  m.trade_off = trade_off(m.recall, m.fall_out);
  return m;
}

OptimalThreshold optimal_threshold(std::span<const double> trade_offs) {
  require(!trade_offs.empty(), "optimal_threshold: empty list");
  OptimalThreshold best{0, trade_offs[0]};
  for (std::size_t i = 1; i < trade_offs.size(); ++i) {
    if (trade_offs[i] > best.trade_off) best = {i, trade_offs[i]};
  }
  return best;
}

OptimalThreshold optimal_threshold(std::span<const MetricSet> per_threshold) {
  std::vector<double> t;
  t.reserve(per_threshold.size());
  for (const auto& m : per_threshold) t.push_back(m.trade_off);
  return optimal_threshold(std::span<const double>(t));
}

SummaryStats aggregate_stats(std::span<const double> values) {
  require(values.size() >= 2, "aggregate_stats: need at least two values for a standard deviation");
  const double n = static_cast<double>(values.size());
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= n;
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  return {mean, std::sqrt(ss / (n - 1.0))};
}

}  // namespace seagrass::evaluation
