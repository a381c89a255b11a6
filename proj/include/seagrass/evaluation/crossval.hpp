#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "seagrass/data/dataset.hpp"
#include "seagrass/evaluation/metrics.hpp"
#include "seagrass/evaluation/roc.hpp"
#include "seagrass/network/model.hpp"
#include "seagrass/network/train.hpp"

namespace seagrass::evaluation {

using network::ExperimentConfig;

using Predictor = std::function<ProbabilityMap(const data::Sample&)>;

struct TrainedModel {
  Predictor predict;
  std::vector<network::TrainRecord> history;
};

/// Produces model M_K^i from the training folds. Must be safe to call concurrently when
/// CrossvalOptions::parallel is set.
using Trainer = std::function<TrainedModel(std::span<const data::Sample> train_set,
                                           const ExperimentConfig& experiment, std::uint64_t seed)>;

/// micro: pixels pooled across the test set; macro: per-image metrics averaged.
enum class Averaging { Micro, Macro };

/// Source of the optimal-threshold decision: the test folds themselves, or a held-out
/// validation fold carved from each model's training folds.
enum class SelectionSource { Test, Validation };

struct CrossvalOptions {
  std::size_t folds = 5;
  Averaging averaging = Averaging::Micro;
  SelectionSource selection = SelectionSource::Test;
  bool parallel = false;
};

struct ThresholdRow {
  double threshold = 0.0;
  ConfusionCounts counts;  // pooled over the evaluated samples
  MetricSet metrics;
};

/// Per-threshold evaluation of one predictor over a sample set (the table R_K^i).
std::vector<ThresholdRow> evaluate_predictor(const Predictor& predictor,
                                             std::span<const data::Sample> samples,
                                             const ThresholdGrid& grid, Averaging averaging);

/// Same, from precomputed probability maps.
std::vector<ThresholdRow> evaluate_maps(std::span<const ProbabilityMap> probabilities,
                                        std::span<const LabelMap> truths,
                                        const ThresholdGrid& grid, Averaging averaging);

struct ModelTable {
  std::size_t fold = 0;
  std::vector<std::string> train_ids;
  std::vector<std::string> test_ids;
  std::vector<std::string> validation_ids;
  std::vector<ThresholdRow> rows;             // on the held-out fold
  std::vector<ThresholdRow> extra_rows;       // on the extra set, if any
  std::vector<ThresholdRow> validation_rows;  // selection = Validation only
  std::vector<network::TrainRecord> history;
};

struct MeanRow {
  double threshold = 0.0;
  double accuracy = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double fall_out = 0.0;
  double trade_off = 0.0;
};

/// Arithmetic mean of the per-model tables (R_K), its ROC curve, and the optimal index.
struct MeanCurve {
  std::vector<MeanRow> rows;
  RocCurve roc;
  OptimalThreshold optimal;
};

MeanCurve mean_curve(std::span<const std::vector<ThresholdRow>> tables);

struct ExperimentResult {
  ExperimentConfig config;
  ThresholdGrid grid;
  CrossvalOptions options;
  std::vector<ModelTable> models;
  MeanCurve mix;
  std::optional<MeanCurve> extra;
  std::optional<MeanCurve> validation;
  /// Optimal threshold index chosen from `options.selection`.
  std::size_t optimal_index = 0;
  double auc = 0.0;
};

class CrossvalError : public std::runtime_error {
 public:
  CrossvalError(std::size_t fold, const std::string& what)
      : std::runtime_error("fold " + std::to_string(fold) + ": " + what), fold_(fold) {}
  std::size_t fold() const { return fold_; }

 private:
  std::size_t fold_;
};

/// k-fold cross-validation: model i trains on every fold but i (and, with validation
/// selection, but the next fold), predicts fold i and the extra set, and is evaluated over
/// the grid. The experiment curve is the per-threshold mean over models.
ExperimentResult run_crossval(std::span<const data::Sample> samples,
                              std::span<const data::Sample> extra,
                              const ExperimentConfig& experiment, const ThresholdGrid& grid,
                              std::uint64_t seed, const CrossvalOptions& options,
                              const Trainer& trainer);

/// Trains a fresh VGG16-FCN8 model of `config` with network::train and predicts with
/// network::segment.
Trainer network_trainer(const network::NetworkConfig& config);

}  // namespace seagrass::evaluation
