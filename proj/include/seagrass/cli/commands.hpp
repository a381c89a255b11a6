#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "seagrass/analysis/uncertainty.hpp"
#include "seagrass/evaluation/crossval.hpp"
#include "seagrass/pipeline/pipeline.hpp"

namespace seagrass::cli {

/// Resolved settings of one run. Each command reads the fields it needs and writes the
/// whole struct to <out>/run_config.json.
struct RunConfig {
  std::string subcommand;
  std::uint64_t seed = 0;
  std::filesystem::path manifest;
  std::filesystem::path model;
  std::filesystem::path out = ".";

  // synth
  std::size_t count = 20;
  std::size_t extra_count = 0;
  std::size_t height = 64;
  std::size_t width = 96;
  double blob_scale = 0.25;

  // network shape
  std::size_t width_divisor = 8;
  std::size_t fc_kernel = 3;

  // experiment axes
  bool data_aug = false;
  double learning_rate = 1e-4;
  std::size_t iterations = 1000;
  std::size_t loss_cadence = 10;

  // evaluation
  std::size_t folds = 5;
  std::string grid;  // empty: 0.1, ..., 0.9
  std::string averaging = "micro";
  std::string selection = "test";
  bool parallel = false;

  // analyze
  std::filesystem::path prediction;
  std::filesystem::path truth;
  std::filesystem::path image;
  std::vector<std::filesystem::path> annotators;
  double threshold = 0.5;

  // simulate
  double altitude = 2.5;
  double velocity = 0.4;
  double image_height = 360.0;
  double focal = 623.3;
  double duration = 10.0;
  double source_fps = 30.0;
  double latency_ms = 100.0;
  std::optional<double> framerate;  // forces the framerate used in the overlap report
  double min_overlap = 0.0;
  bool virtual_clock = true;

  nlohmann::ordered_json to_json() const;
  evaluation::ThresholdGrid threshold_grid() const;
  network::ExperimentConfig experiment() const;
  evaluation::CrossvalOptions crossval_options() const;
};

/// Writes <out>/run_config.json, creating <out> if needed.
void write_run_config(const RunConfig& config);

struct SynthOutput {
  data::DatasetManifest manifest;
  std::filesystem::path manifest_path;
};

/// <out>/images/<id>.ppm, <out>/labels/<id>.pgm and <out>/manifest.tsv.
SynthOutput cmd_synth(const RunConfig& config);

struct TrainOutput {
  std::filesystem::path model_path;
  std::vector<network::TrainRecord> history;
};

/// Trains on the manifest's mix samples, freezes the model (to `model`, or
/// <out>/model.frozen) and writes <out>/loss.csv.
TrainOutput cmd_train(const RunConfig& config);

/// Cross-validation over the mix samples; extra samples are evaluated by every model.
/// Writes summary.json, model_<i>.csv, mean.csv (and extra_mean.csv) and roc.svg.
/// Without a trainer, trains networks of the configured shape.
evaluation::ExperimentResult cmd_crossval(const RunConfig& config,
                                          const evaluation::Trainer& trainer = {});

struct EvaluateOutput {
  std::vector<evaluation::ThresholdRow> rows;
  evaluation::RocCurve roc;
  evaluation::OptimalThreshold optimal;
};

/// Evaluates a frozen model (or `predictor`) over every sample of the manifest: metrics.csv,
/// evaluation.json, roc.svg, and per-sample probability maps and error overlays at the
/// optimal threshold.
EvaluateOutput cmd_evaluate(const RunConfig& config, const evaluation::Predictor& predictor = {});

struct AnalyzeOutput {
  /// Set when annotator maps were given.
  std::optional<analysis::UncertaintyMap> annotator;
  analysis::UncertaintyMap network;
  std::optional<analysis::ErrorFraction> errors_in_annotator;
  analysis::ErrorFraction errors_in_network;
};

/// Uncertainty analysis of one prediction: annotator and network uncertainty maps, their
/// area fractions, and the share of misclassified pixels inside each. Writes PGM maps,
/// analysis.json, and an error overlay when `image` is set.
AnalyzeOutput cmd_analyze(const RunConfig& config);

/// Runs the two-stage pipeline on a simulated survey. Without a segmenter, uses the frozen
/// model when `model` is set and a constant stub otherwise, with latency_ms as its latency.
/// Writes coverage.jsonl, pipeline.json and the probability maps under <out>/maps.
pipeline::PipelineResult cmd_simulate(const RunConfig& config,
                                      const std::optional<pipeline::Segmenter>& segmenter = {});

/// Human-readable one-paragraph summaries printed by the executable.
std::string describe(const pipeline::PipelineResult& result);

}  // namespace seagrass::cli
