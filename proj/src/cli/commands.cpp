#include "seagrass/cli/commands.hpp"

#include <cstdio>
#include <memory>

#include "seagrass/data/pnm.hpp"
#include "seagrass/data/synth.hpp"
#include "seagrass/data/transforms.hpp"
#include "seagrass/error.hpp"
#include "seagrass/evaluation/report.hpp"
#include "seagrass/network/frozen.hpp"
#include "seagrass/rng.hpp"

namespace seagrass::cli {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

nlohmann::ordered_json RunConfig::to_json() const {
  ordered_json j;
  j["subcommand"] = subcommand;
  j["seed"] = seed;
  j["manifest"] = manifest.string();
  j["model"] = model.string();
  j["out"] = out.string();
  j["synth"] = {{"count", count}, {"extraCount", extra_count}, {"height", height},
                {"width", width}, {"blobScale", blob_scale}};
  j["network"] = {{"widthDivisor", width_divisor}, {"fcKernel", fc_kernel}};
  j["experiment"] = {{"dataAug", data_aug}, {"learningRate", learning_rate},
                     {"iterations", iterations}, {"lossCadence", loss_cadence}};
  j["evaluation"] = {{"folds", folds}, {"grid", threshold_grid().thresholds}, {"averaging", averaging},
                     {"selection", selection}, {"parallel", parallel}};
  ordered_json ann = ordered_json::array();
  for (const auto& a : annotators) ann.push_back(a.string());
  j["analyze"] = {{"prediction", prediction.string()}, {"truth", truth.string()},
                  {"image", image.string()}, {"annotators", ann}, {"threshold", threshold}};
  j["simulate"] = {{"altitude", altitude},
                   {"velocity", velocity},
                   {"imageHeight", image_height},
                   {"focal", focal},
                   {"duration", duration},
                   {"sourceFps", source_fps},
                   {"latencyMs", latency_ms},
                   {"framerate", framerate ? ordered_json(*framerate) : ordered_json()},
                   {"minOverlap", min_overlap},
                   {"virtualClock", virtual_clock}};
  return j;
}

evaluation::ThresholdGrid RunConfig::threshold_grid() const {
  return grid.empty() ? evaluation::ThresholdGrid::standard() : evaluation::ThresholdGrid::parse(grid);
}

network::ExperimentConfig RunConfig::experiment() const {
  network::ExperimentConfig e;
  e.data_aug = data_aug;
  e.learning_rate = learning_rate;
  e.iterations = iterations;
  e.loss_cadence = loss_cadence;
  return e;
}

evaluation::CrossvalOptions RunConfig::crossval_options() const {
  evaluation::CrossvalOptions o;
  o.folds = folds;
  if (averaging == "micro") {
    o.averaging = evaluation::Averaging::Micro;
  } else if (averaging == "macro") {
    o.averaging = evaluation::Averaging::Macro;
  } else {
    contract_fail("averaging must be 'micro' or 'macro', got '" + averaging + "'");
  }
  if (selection == "test") {
    o.selection = evaluation::SelectionSource::Test;
  } else if (selection == "validation") {
    o.selection = evaluation::SelectionSource::Validation;
  } else {
    contract_fail("selection must be 'test' or 'validation', got '" + selection + "'");
  }
  o.parallel = parallel;
  return o;
}

void write_run_config(const RunConfig& config) {
  fs::create_directories(config.out);
  evaluation::write_text(config.out / "run_config.json", config.to_json().dump(2) + "\n");
}

namespace {

struct LoadedSets {
  std::vector<data::Sample> mix;
  std::vector<data::Sample> extra;
};

LoadedSets load_sets(const RunConfig& config) {
  require(!config.manifest.empty(), "a dataset manifest is required (--manifest)");
  LoadedSets sets;
  for (auto& s : data::load_dataset(data::read_manifest(config.manifest))) {
    (s.meta.set == data::SetKind::Extra ? sets.extra : sets.mix).push_back(std::move(s));
  }
  return sets;
}

// Network input extents are the sample extents padded up to multiples of 32.
network::NetworkConfig network_config_for(std::span<const data::Sample> samples, const RunConfig& config) {
  require(!samples.empty(), "no samples to size the network from");
  std::size_t h = 0;
  std::size_t w = 0;
  for (const auto& s : samples) {
    const auto p = data::padding_for(s.image.height, s.image.width, network::kInputMultiple);
    const std::size_t ph = s.image.height + p.top + p.bottom;
    const std::size_t pw = s.image.width + p.left + p.right;
    if (h == 0) {
      h = ph;
      w = pw;
    }
    require(ph == h && pw == w, "sample '" + s.id + "' pads to " + std::to_string(ph) + "x" +
                                    std::to_string(pw) + ", others to " + std::to_string(h) + "x" +
                                    std::to_string(w));
  }
  auto net = network::NetworkConfig::toy(h, w, config.width_divisor);
  net.fc_kernel = config.fc_kernel;
  net.validate();
  return net;
}

std::string format_real(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::vector<evaluation::SvgCurve> single_curve(const std::string& label, const evaluation::RocCurve& roc,
                                               std::size_t optimal) {
  return {evaluation::SvgCurve{label, roc, optimal}};
}

}  // namespace

SynthOutput cmd_synth(const RunConfig& config) {
  require(config.count > 0, "synth: count must be positive");
  write_run_config(config);
  fs::create_directories(config.out / "images");
  fs::create_directories(config.out / "labels");

  SynthOutput out;
  out.manifest.base_dir = config.out;
  auto emit = [&](std::vector<data::Sample> samples, const std::string& prefix, const std::string& camera,
                  data::SetKind set) {
    for (std::size_t i = 0; i < samples.size(); ++i) {
      char id[32];
      std::snprintf(id, sizeof id, "%s_%04zu", prefix.c_str(), i);
      const fs::path image = fs::path("images") / (std::string(id) + ".ppm");
      const fs::path label = fs::path("labels") / (std::string(id) + ".pgm");
      data::write_ppm(config.out / image, samples[i].image);
      data::write_label_pgm(config.out / label, samples[i].label);
      out.manifest.entries.push_back({id, image, label, "synthetic", camera, set});
    }
  };
  emit(data::synth_dataset(config.count, config.height, config.width, config.blob_scale,
                           derive_seed(config.seed, "synth.mix")),
       "synth", "camera-a", data::SetKind::Mix);
  if (config.extra_count > 0) {
    emit(data::synth_dataset(config.extra_count, config.height, config.width, config.blob_scale,
                             derive_seed(config.seed, "synth.extra")),
         "extra", "camera-b", data::SetKind::Extra);
  }
  out.manifest_path = config.out / "manifest.tsv";
  data::write_manifest(out.manifest_path, out.manifest);
  return out;
}

TrainOutput cmd_train(const RunConfig& config) {
  const auto sets = load_sets(config);
  require(!sets.mix.empty(), "train: the manifest has no mix samples");
  const auto net = network_config_for(sets.mix, config);
  write_run_config(config);

  network::Model model(net, derive_seed(config.seed, "init"));
  TrainOutput out;
  out.history = network::train(model, sets.mix, config.experiment(), derive_seed(config.seed, "train"));
  out.model_path = config.model.empty() ? config.out / "model.frozen" : config.model;
  if (out.model_path.has_parent_path()) fs::create_directories(out.model_path.parent_path());
  network::freeze(model, out.model_path);

  std::string csv = "iteration,loss\n";
  for (const auto& r : out.history) csv += std::to_string(r.iteration) + "," + format_real(r.loss) + "\n";
  evaluation::write_text(config.out / "loss.csv", csv);
  return out;
}

evaluation::ExperimentResult cmd_crossval(const RunConfig& config, const evaluation::Trainer& trainer) {
  const auto sets = load_sets(config);
  const auto grid = config.threshold_grid();
  const auto options = config.crossval_options();
  evaluation::Trainer chosen = trainer;
  if (!chosen) chosen = evaluation::network_trainer(network_config_for(sets.mix, config));
  write_run_config(config);

  const auto result =
      evaluation::run_crossval(sets.mix, sets.extra, config.experiment(), grid, config.seed, options, chosen);
  evaluation::write_text(config.out / "summary.json", evaluation::to_json(result).dump(2) + "\n");
  for (const auto& m : result.models) {
    evaluation::write_metrics_csv(config.out / ("model_" + std::to_string(m.fold) + ".csv"), m.rows);
  }
  evaluation::write_mean_csv(config.out / "mean.csv", result.mix.rows);
  std::vector<evaluation::SvgCurve> curves{{"mix", result.mix.roc, result.optimal_index}};
  if (result.extra) {
    evaluation::write_mean_csv(config.out / "extra_mean.csv", result.extra->rows);
    curves.push_back({"extra", result.extra->roc, result.optimal_index});
  }
  evaluation::write_roc_svg(config.out / "roc.svg", curves);
  return result;
}

EvaluateOutput cmd_evaluate(const RunConfig& config, const evaluation::Predictor& predictor) {
  const auto sets = load_sets(config);
  evaluation::Predictor predict = predictor;
  if (!predict) {
    require(!config.model.empty(), "evaluate: a frozen model (--model) is required");
    auto model = std::make_shared<network::Model>(network::load_frozen(config.model));
    predict = [model](const data::Sample& s) { return network::segment(*model, s.image); };
  }
  const auto grid = config.threshold_grid();
  write_run_config(config);
  fs::create_directories(config.out / "maps");
  fs::create_directories(config.out / "overlays");

  std::vector<const data::Sample*> samples;
  for (const auto& s : sets.mix) samples.push_back(&s);
  for (const auto& s : sets.extra) samples.push_back(&s);
  std::vector<ProbabilityMap> probs;
  std::vector<LabelMap> truths;
  for (const auto* s : samples) {
    probs.push_back(predict(*s));
    require(same_extents(probs.back(), s->label),
            "evaluate: prediction extents differ from the label of sample '" + s->id + "'");
    truths.push_back(s->label);
    data::write_probability_pgm(config.out / "maps" / (s->id + ".pgm"), probs.back());
  }

  const auto averaging = config.crossval_options().averaging;
  EvaluateOutput out;
  out.rows = evaluation::evaluate_maps(probs, truths, grid, averaging);
  std::vector<evaluation::MetricSet> per_threshold;
  std::vector<evaluation::RocPoint> points;
  for (const auto& r : out.rows) {
    per_threshold.push_back(r.metrics);
    points.push_back({r.threshold, r.metrics.fall_out, r.metrics.recall});
  }
  out.roc = evaluation::make_curve(std::move(points));
  out.optimal = evaluation::optimal_threshold(std::span<const evaluation::MetricSet>(per_threshold));
  const double t = grid.thresholds[out.optimal.index];
  for (std::size_t i = 0; i < samples.size(); ++i) {
    data::write_ppm(config.out / "overlays" / (samples[i]->id + ".ppm"),
                    analysis::error_overlay(samples[i]->image, evaluation::binarize(probs[i], t), truths[i]));
  }

  evaluation::write_metrics_csv(config.out / "metrics.csv", out.rows);
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& r : out.rows) rows.push_back(evaluation::to_json(r));
  ordered_json summary;
  summary["samples"] = samples.size();
  summary["rows"] = rows;
  summary["optimalIndex"] = out.optimal.index;
  summary["optimalThreshold"] = t;
  summary["auc"] = out.roc.auc;
  evaluation::write_text(config.out / "evaluation.json", summary.dump(2) + "\n");
  evaluation::write_roc_svg(config.out / "roc.svg", single_curve("evaluation", out.roc, out.optimal.index));
  return out;
}

AnalyzeOutput cmd_analyze(const RunConfig& config) {
  require(!config.prediction.empty(), "analyze: a probability map (--prediction) is required");
  require(!config.truth.empty(), "analyze: a ground-truth label map (--truth) is required");
  require(config.threshold > 0.0 && config.threshold < 1.0, "analyze: threshold must lie in (0, 1)");
  const ProbabilityMap prob = data::read_probability_pgm(config.prediction);
  const LabelMap truth = data::read_label_pgm(config.truth);
  require(same_extents(prob, truth), "analyze: prediction and truth extents differ");
  analysis::AnnotatorSet annotators;
  for (const auto& p : config.annotators) annotators.maps.push_back(data::read_label_pgm(p));
  if (!annotators.maps.empty()) {
    annotators.validate();
    require(same_extents(annotators.maps.front(), truth), "analyze: annotator and truth extents differ");
  }
  write_run_config(config);

  const LabelMap predicted = evaluation::binarize(prob, config.threshold);
  AnalyzeOutput out;
  out.network = analysis::network_uncertainty(prob);
  out.errors_in_network = analysis::error_in_uncertainty_fraction(predicted, truth, out.network);
  data::write_pgm(config.out / "network_uncertainty.pgm", out.network.height, out.network.width,
                  analysis::to_gray(out.network).values, 255);

  auto fraction_json = [](const analysis::ErrorFraction& f) {
    return ordered_json{{"fraction", f.value},
                        {"degenerate", f.degenerate},
                        {"misclassified", f.misclassified},
                        {"inside", f.inside}};
  };
  ordered_json summary;
  summary["threshold"] = config.threshold;
  summary["network"] = {{"areaFraction", out.network.area_fraction},
                        {"errorsInside", fraction_json(out.errors_in_network)}};
  if (!annotators.maps.empty()) {
    out.annotator = analysis::annotator_uncertainty(annotators);
    out.errors_in_annotator = analysis::error_in_uncertainty_fraction(predicted, truth, *out.annotator);
    const GrayMap mean = analysis::annotator_mean(annotators);
    data::write_pgm(config.out / "annotator_mean.pgm", mean.height, mean.width, mean.values, 255);
    data::write_pgm(config.out / "annotator_uncertainty.pgm", out.annotator->height, out.annotator->width,
                    analysis::to_gray(*out.annotator).values, 255);
    summary["annotators"] = {{"count", annotators.maps.size()},
                             {"areaFraction", out.annotator->area_fraction},
                             {"errorsInside", fraction_json(*out.errors_in_annotator)}};
  }
  if (!config.image.empty()) {
    const Image image = data::read_ppm(config.image);
    require(same_extents(image, truth), "analyze: image and truth extents differ");
    data::write_ppm(config.out / "overlay.ppm", analysis::error_overlay(image, predicted, truth));
  }
  evaluation::write_text(config.out / "analysis.json", summary.dump(2) + "\n");
  return out;
}

pipeline::PipelineResult cmd_simulate(const RunConfig& config,
                                      const std::optional<pipeline::Segmenter>& segmenter) {
  require(config.latency_ms >= 0.0, "simulate: latency must be non-negative");
  pipeline::Segmenter seg;
  if (segmenter) {
    seg = *segmenter;
  } else if (!config.model.empty()) {
    auto model = std::make_shared<network::Model>(network::load_frozen(config.model));
    seg.infer = [model](const Image& image) { return network::segment(*model, image); };
    seg.latency_s = config.latency_ms / 1000.0;
  } else {
    seg.infer = [](const Image& image) { return ProbabilityMap(image.height, image.width, 0.5f); };
    seg.latency_s = config.latency_ms / 1000.0;
  }

  pipeline::SimulatedSourceConfig src;
  src.rate_fps = config.source_fps;
  src.duration_s = config.duration;
  src.altitude = config.altitude;
  src.velocity = config.velocity;
  src.raw_height = 2 * config.height;
  src.raw_width = 2 * config.width;
  src.blob_scale = config.blob_scale;
  src.seed = derive_seed(config.seed, "simulate.source");
  pipeline::SimulatedSource source(src);

  pipeline::PipelineConfig pc;
  pc.image_height_px = config.image_height;
  pc.focal_px = config.focal;
  pc.min_overlap = config.min_overlap;
  pc.process_height = config.height;
  pc.process_width = config.width;
  pc.forced_framerate = config.framerate;
  pc.virtual_clock = config.virtual_clock;
  pc.map_dir = config.out / "maps";
  pc.validate();
  write_run_config(config);
  fs::create_directories(*pc.map_dir);

  auto result = pipeline::run_pipeline(source, seg, pc);
  pipeline::write_coverage_log(config.out / "coverage.jsonl", result.log);
  const auto& c = result.counters;
  const auto& r = result.report;
  ordered_json summary;
  summary["counters"] = {{"produced", c.produced},     {"segmented", c.segmented},
                         {"dropped", c.dropped},       {"inFlight", c.in_flight},
                         {"elapsedSeconds", c.elapsed_s}, {"achievedFps", c.achieved_fps},
                         {"meanOverlap", c.mean_overlap}};
  summary["overlap"] = {{"altitude", r.altitude},
                        {"velocity", r.velocity},
                        {"imageHeight", r.image_height_px},
                        {"focal", r.focal_px},
                        {"framerate", r.framerate},
                        {"footprintHeight", r.footprint_height},
                        {"keyframeDisplacement", r.keyframe_displacement},
                        {"overlap", r.overlap}};
  summary["coverage"] = {{"pass", result.verdict.pass}, {"explanation", result.verdict.explanation}};
  evaluation::write_text(config.out / "pipeline.json", summary.dump(2) + "\n");
  return result;
}

std::string describe(const pipeline::PipelineResult& result) {
  const auto& c = result.counters;
  char buf[256];
  std::snprintf(buf, sizeof buf,
                "produced %zu, segmented %zu, dropped %zu, in flight %zu\nachieved %.3f fps over %.3f s, "
                "mean frame-to-frame overlap %.1f%%\noverlap %.1f%% at %.4f fps\n",
                c.produced, c.segmented, c.dropped, c.in_flight, c.achieved_fps, c.elapsed_s,
                100.0 * c.mean_overlap, 100.0 * result.report.overlap, result.report.framerate);
  return std::string(buf) + result.verdict.explanation + "\n";
}

}  // namespace seagrass::cli
