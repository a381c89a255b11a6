#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "seagrass/evaluation/crossval.hpp"

namespace seagrass::evaluation {

inline constexpr const char* kMetricsCsvHeader =
    "threshold,tp,fp,tn,fn,accuracy,precision,recall,fallOut,tradeOff";
inline constexpr const char* kMeanCsvHeader = "threshold,accuracy,precision,recall,fallOut,tradeOff";

/// One row per threshold with the columns of kMetricsCsvHeader. Reals use 17
/// significant digits so rows parse back to the same doubles.
void write_metrics_csv(const std::filesystem::path& path, std::span<const ThresholdRow> rows);
void write_mean_csv(const std::filesystem::path& path, std::span<const MeanRow> rows);

nlohmann::json to_json(const ThresholdRow& row);
nlohmann::json to_json(const MeanCurve& curve);
/// Experiment summary: config, grid, per-model tables and histories, mean curves.
nlohmann::json to_json(const ExperimentResult& result);

struct SvgCurve {
  std::string label;
  RocCurve roc;
  std::size_t optimal_index = 0;
};

/// ROC plot over the unit square: one polyline per curve (closed with the (0,0) and
/// (1,1) endpoints) and an "X" at each curve's optimal threshold.
std::string roc_svg(std::span<const SvgCurve> curves);
void write_roc_svg(const std::filesystem::path& path, std::span<const SvgCurve> curves);

void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace seagrass::evaluation
