// seagrass: dataset generation, training, cross-validation, evaluation, uncertainty
// analysis and survey-pipeline simulation.
//
// Precedence: command-line flags, then the --config file, then SEAGRASS_<FLAG>
// environment variables (e.g. SEAGRASS_SEED, SEAGRASS_OUT), then defaults.
// --config belongs to the top-level app and goes before the subcommand.

#include <cctype>
#include <cstdio>
#include <exception>
#include <string>

#include <CLI11.hpp>

#include "seagrass/cli/commands.hpp"
#include "seagrass/evaluation/metrics.hpp"

namespace {

using seagrass::cli::RunConfig;

std::string env_name(const std::string& flag) {
  std::string name = "SEAGRASS_";
  for (char ch : flag) name += ch == '-' ? '_' : static_cast<char>(std::toupper(static_cast<unsigned char>(ch)));
  return name;
}

template <typename T>
CLI::Option* opt(CLI::App* app, const std::string& flag, T& value, const std::string& help) {
  return app->add_option("--" + flag, value, help)->envname(env_name(flag))->capture_default_str();
}

CLI::Option* flag(CLI::App* app, const std::string& name, bool& value, const std::string& help) {
  return app->add_flag("--" + name, value, help)->envname(env_name(name));
}

void common(CLI::App* app, RunConfig& c) {
  opt(app, "seed", c.seed, "seed for every random stream of the run");
  opt(app, "out", c.out, "output directory");
}

void network_shape(CLI::App* app, RunConfig& c) {
  opt(app, "width-divisor", c.width_divisor, "divide the reference channel widths by this");
  opt(app, "fc-kernel", c.fc_kernel, "spatial kernel of the first fully convolutional stage");
}

void experiment(CLI::App* app, RunConfig& c) {
  opt(app, "lr", c.learning_rate, "Adam learning rate");
  opt(app, "iters", c.iterations, "training iterations (batch size 1)");
  opt(app, "loss-cadence", c.loss_cadence, "iterations per loss record");
  flag(app, "data-aug", c.data_aug, "brightness/contrast augmentation during training");
}

void print_rows(const std::vector<seagrass::evaluation::ThresholdRow>& rows) {
  std::printf("threshold  accuracy  precision  recall  fallOut  tradeOff\n");
  for (const auto& r : rows) {
    std::printf("%9.3f  %8.4f  %9.4f  %6.4f  %7.4f  %8.4f\n", r.threshold, r.metrics.accuracy,
                r.metrics.precision, r.metrics.recall, r.metrics.fall_out, r.metrics.trade_off);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Seagrass meadow segmentation toolkit"};
  app.require_subcommand(1);
  app.set_config("--config", "", "TOML/INI file with flag values (sections per subcommand)");

  RunConfig c;
  double framerate = 0.0;

  auto* synth = app.add_subcommand("synth", "generate a seeded synthetic dataset with a manifest");
  common(synth, c);
  opt(synth, "count", c.count, "mix samples");
  opt(synth, "extra-count", c.extra_count, "held-out extra samples");
  opt(synth, "height", c.height, "image height in pixels");
  opt(synth, "width", c.width, "image width in pixels");
  opt(synth, "blob-scale", c.blob_scale, "meadow blob radius as a fraction of the shorter side");

  auto* train = app.add_subcommand("train", "train a network and freeze it");
  common(train, c);
  opt(train, "manifest", c.manifest, "dataset manifest (.tsv or .json)")->required();
  opt(train, "model", c.model, "frozen model output path (default <out>/model.frozen)");
  network_shape(train, c);
  experiment(train, c);

  auto* crossval = app.add_subcommand("crossval", "k-fold cross-validation of one experiment");
  common(crossval, c);
  opt(crossval, "manifest", c.manifest, "dataset manifest")->required();
  opt(crossval, "folds", c.folds, "number of folds");
  opt(crossval, "grid", c.grid, "comma-separated thresholds (default 0.1,...,0.9)");
  opt(crossval, "averaging", c.averaging, "micro (pooled pixels) or macro (per image)");
  opt(crossval, "selection", c.selection, "test or validation: where the optimal threshold is chosen");
  flag(crossval, "parallel", c.parallel, "train folds concurrently");
  network_shape(crossval, c);
  experiment(crossval, c);

  auto* evaluate = app.add_subcommand("evaluate", "evaluate a frozen model over a dataset");
  common(evaluate, c);
  opt(evaluate, "manifest", c.manifest, "dataset manifest")->required();
  opt(evaluate, "model", c.model, "frozen model")->required();
  opt(evaluate, "grid", c.grid, "comma-separated thresholds (default 0.1,...,0.9)");
  opt(evaluate, "averaging", c.averaging, "micro or macro");

  auto* analyze = app.add_subcommand("analyze", "annotator and network uncertainty of one prediction");
  common(analyze, c);
  opt(analyze, "prediction", c.prediction, "probability map (16-bit PGM)")->required();
  opt(analyze, "truth", c.truth, "ground-truth label map (PGM)")->required();
  opt(analyze, "annotator", c.annotators, "annotator label map (PGM), repeat for each annotator");
  opt(analyze, "image", c.image, "source image (PPM) for the error overlay");
  opt(analyze, "threshold", c.threshold, "binarization threshold");

  auto* simulate = app.add_subcommand("simulate", "run the online segmentation pipeline on a simulated survey");
  common(simulate, c);
  opt(simulate, "model", c.model, "frozen model (default: constant stub segmenter)");
  opt(simulate, "altitude", c.altitude, "navigation altitude in meters");
  opt(simulate, "velocity", c.velocity, "vehicle speed in meters/second");
  opt(simulate, "image-height", c.image_height, "image height in pixels for the footprint");
  opt(simulate, "focal", c.focal, "focal length in pixels");
  opt(simulate, "duration", c.duration, "survey duration in seconds");
  opt(simulate, "source-fps", c.source_fps, "camera framerate");
  opt(simulate, "latency-ms", c.latency_ms, "segmenter latency (virtual-clock cost, extra sleep otherwise)");
  opt(simulate, "framerate", framerate, "force the framerate used in the overlap report");
  opt(simulate, "min-overlap", c.min_overlap, "coverage passes when overlap exceeds this");
  opt(simulate, "height", c.height, "processed frame height");
  opt(simulate, "width", c.width, "processed frame width");
  simulate->add_option("--virtual-clock", c.virtual_clock, "deterministic virtual clock (true) or two threads")
      ->envname(env_name("virtual-clock"))
      ->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*synth) {
      c.subcommand = "synth";
      const auto out = seagrass::cli::cmd_synth(c);
      std::printf("wrote %zu samples, manifest %s\n", out.manifest.entries.size(), out.manifest_path.string().c_str());
    } else if (*train) {
      c.subcommand = "train";
      const auto out = seagrass::cli::cmd_train(c);
      std::printf("loss %.4f -> %.4f over %zu iterations, model %s\n", out.history.front().loss,
                  out.history.back().loss, c.iterations, out.model_path.string().c_str());
    } else if (*crossval) {
      c.subcommand = "crossval";
      const auto result = seagrass::cli::cmd_crossval(c);
      std::printf("mean over %zu models:\n", result.models.size());
      std::printf("threshold  accuracy  precision  recall  fallOut  tradeOff\n");
      for (const auto& r : result.mix.rows) {
        std::printf("%9.3f  %8.4f  %9.4f  %6.4f  %7.4f  %8.4f\n", r.threshold, r.accuracy, r.precision,
                    r.recall, r.fall_out, r.trade_off);
      }
      std::printf("auc %.4f, optimal threshold %.3f\n", result.auc,
                  result.grid.thresholds[result.optimal_index]);
    } else if (*evaluate) {
      c.subcommand = "evaluate";
      const auto out = seagrass::cli::cmd_evaluate(c);
      print_rows(out.rows);
      std::printf("auc %.4f, optimal threshold %.3f\n", out.roc.auc, out.rows[out.optimal.index].threshold);
    } else if (*analyze) {
      c.subcommand = "analyze";
      const auto out = seagrass::cli::cmd_analyze(c);
      if (out.annotator) {
        std::printf("annotator uncertainty area %.4f, errors inside %.4f\n", out.annotator->area_fraction,
                    out.errors_in_annotator->value);
      }
      std::printf("network uncertainty area %.4f, errors inside %.4f\n", out.network.area_fraction,
                  out.errors_in_network.value);
    } else if (*simulate) {
      c.subcommand = "simulate";
      if (simulate->count("--framerate") > 0) c.framerate = framerate;
      const auto result = seagrass::cli::cmd_simulate(c);
      std::fputs(seagrass::cli::describe(result).c_str(), stdout);
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
