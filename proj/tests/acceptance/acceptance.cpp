// Acceptance runner: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <functional>
#include <iterator>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "seagrass/analysis/uncertainty.hpp"
#include "seagrass/data/folds.hpp"
#include "seagrass/data/synth.hpp"
#include "seagrass/evaluation/crossval.hpp"
#include "seagrass/evaluation/metrics.hpp"
#include "seagrass/evaluation/roc.hpp"
#include "seagrass/network/frozen.hpp"
#include "seagrass/network/train.hpp"
#include "seagrass/numerics/layers.hpp"
#include "seagrass/pipeline/geometry.hpp"
#include "seagrass/pipeline/pipeline.hpp"
#include "support/oracles.hpp"
#include "support/temp_dir.hpp"

using namespace seagrass;

namespace {

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void check(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << "[failed: " << what << "] ";
    }
  }
};

using Criterion = std::function<void(Outcome&)>;

void overlap_reproduction(Outcome& o) {
  const double fp = pipeline::footprint_height(2.5, 360, 623.3);
  const double kf = pipeline::keyframe_displacement(0.4, 0.42);
  const double ov = pipeline::overlap(fp, kf);
  o.detail << "h_FP " << fp << " m, d_KF " << kf << " m, overlap " << 100.0 * ov << "% ";
  o.check(std::abs(100.0 * ov - 34.0) <= 0.1, "overlap within 34.0 +/- 0.1 pp");
  o.check(pipeline::validate_coverage(pipeline::make_overlap_report(2.5, 0.4, 360, 623.3, 0.42), 0.0).pass,
          "coverage verdict passes");
}

void metric_exactness(Outcome& o) {
  const auto fixtures = testing::metric_fixtures();
  o.check(fixtures.size() >= 20, "at least 20 fixtures");
  double worst = 0.0;
  for (const auto& f : fixtures) {
    const auto m = evaluation::metrics(f.counts);
    for (auto [got, want] : {std::pair{m.accuracy, f.accuracy}, std::pair{m.precision, f.precision},
                             std::pair{m.recall, f.recall}, std::pair{m.fall_out, f.fall_out},
                             std::pair{m.trade_off, f.trade_off}}) {
      worst = std::max(worst, std::abs(got - want));
    }
  }
  o.detail << fixtures.size() << " fixtures, max deviation " << worst << " ";
  o.check(worst <= 1e-12, "exact rational values to 1e-12");
  const auto m = evaluation::metrics({50, 10, 30, 10});
  o.detail << "hand fixture " << m.accuracy << "/" << m.precision << "/" << m.recall << "/" << m.fall_out << "/"
           << m.trade_off << " ";
  o.check(std::abs(m.accuracy - 0.80) <= 5e-5 && std::abs(m.precision - 0.8333) <= 5e-5 &&
              std::abs(m.recall - 0.8333) <= 5e-5 && std::abs(m.fall_out - 0.25) <= 5e-5 &&
              std::abs(m.trade_off - 0.7917) <= 5e-5,
          "hand fixture values");
}

void gradient_fidelity(Outcome& o) {
  double worst_layer = 0.0;
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    for (const auto& c : testing::layer_gradient_checks(seed)) {
      worst_layer = std::max(worst_layer, c.report.max_relative_error);
      o.check(c.report.passed, c.name + " seed " + std::to_string(seed));
    }
  }
  const auto net = testing::network_gradient_check(1, 24);
  o.detail << "layers max rel. error " << worst_layer << " (<= 1e-4), end-to-end " << net.max_relative_error
           << " over " << net.probes << " probes (<= 1e-3) ";
  o.check(worst_layer <= 1e-4, "layer checks");
  o.check(net.passed && net.max_relative_error <= 1e-3 && net.probes >= 20, "end-to-end check");
}

void bilinear_fidelity(Outcome& o) {
  using numerics::Tensor;
  const auto k = numerics::bilinear_kernel<double>(2, 1);
  const double profile[4] = {0.25, 0.75, 0.75, 0.25};
  double kernel_dev = 0.0;
  for (std::size_t y = 0; y < 4; ++y)
    for (std::size_t x = 0; x < 4; ++x) kernel_dev = std::max(kernel_dev, std::abs(k(0, 0, y, x) - profile[y] * profile[x]));
  o.check(kernel_dev == 0.0, "factor-2 kernel is the outer product");

  const std::size_t h = 8, w = 9;
  Tensor<double> ramp({1, 1, h, w});
  for (std::size_t y = 0; y < h; ++y)
    for (std::size_t x = 0; x < w; ++x) ramp(0, 0, y, x) = 0.4 * static_cast<double>(y) - 0.9 * static_cast<double>(x) + 1.5;
  const auto up = numerics::transposed_conv2d_forward(ramp, k, {2, numerics::bilinear_cropping(2)});
  double worst = 0.0;
  for (std::size_t u = 2; u < (h - 1) * 2; ++u)
    for (std::size_t v = 2; v < (w - 1) * 2; ++v)
      worst = std::max(worst, std::abs(up(0, 0, u, v) - testing::bilinear_sample(ramp, u, v, 2)));
  o.detail << "kernel deviation " << kernel_dev << ", ramp interior max deviation " << worst << " ";
  o.check(worst <= 1e-5, "ramp interpolation within 1e-5");
}

void roc_oracle(Outcome& o) {
  const auto grid = evaluation::ThresholdGrid::standard();
  auto fixture = [](std::size_t n, double signal, std::uint64_t seed) {
    Rng rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    ProbabilityMap p(1, n);
    LabelMap t(1, n);
    for (std::size_t i = 0; i < n; ++i) {
      t.classes[i] = u(rng) < 0.5 ? 1 : 0;
      p.values[i] = static_cast<float>((1.0 - signal) * u(rng) + signal * t.classes[i]);
    }
    return std::pair{p, t};
  };
  for (std::uint64_t s = 1; s <= 3; ++s) {
    std::vector<ProbabilityMap> probs;
    std::vector<LabelMap> truths;
    for (int m = 0; m < 3; ++m) {
      auto [p, t] = fixture(500, 0.2 * static_cast<double>(s), 10 * s + static_cast<std::uint64_t>(m));
      probs.push_back(p);
      truths.push_back(t);
    }
    const double auc = evaluation::roc(grid, probs, truths).auc;
    o.check(auc == testing::brute_force_auc(grid.thresholds, probs, truths), "brute-force trapezoid fixture " + std::to_string(s));
  }

  auto [sep_p, sep_t] = fixture(1000, 0.0, 4);
  for (std::size_t i = 0; i < sep_p.values.size(); ++i) sep_p.values[i] = sep_t.classes[i] ? 0.95f : 0.05f;
  const double perfect = evaluation::roc(grid, sep_p, sep_t).auc;
  o.check(perfect == 1.0, "perfect separator AUC 1");

  auto [noise_p, noise_t] = fixture(200000, 0.0, 5);
  const double chance = evaluation::roc(grid, noise_p, noise_t).auc;
  o.check(std::abs(chance - 0.5) <= 0.02, "chance AUC 0.5 +/- 0.02");

  bool monotone = true;
  for (std::uint64_t s = 0; s < 100; ++s) {
    auto [p, t] = fixture(256, 0.3, 100 + s);
    const auto curve = evaluation::roc(grid, p, t);
    for (std::size_t j = 0; j + 1 < curve.points.size(); ++j) {
      monotone = monotone && curve.points[j].fall_out >= curve.points[j + 1].fall_out &&
                 curve.points[j].recall >= curve.points[j + 1].recall;
    }
  }
  o.check(monotone, "ROC monotone on 100 maps");
  o.detail << "3 brute-force fixtures exact, perfect AUC " << perfect << ", chance AUC " << chance
           << " on 200000 pixels, monotone on 100 maps ";
}

void crossval_properties(Outcome& o) {
  auto ids = [](std::size_t n) {
    std::vector<std::string> v;
    for (std::size_t i = 0; i < n; ++i) v.push_back("s" + std::to_string(i));
    return v;
  };
  bool folds_ok = true;
  for (std::size_t n : {460u, 23u, 10u, 7u}) {
    const auto all = ids(n);
    const auto plan = data::make_folds(all, 5, n);
    std::set<std::string> seen;
    for (std::size_t f = 0; f < 5; ++f)
      for (const auto& id : plan.fold(f)) folds_ok = folds_ok && seen.insert(id).second;
    folds_ok = folds_ok && seen.size() == n;
    const auto sizes = plan.fold_sizes();
    folds_ok = folds_ok && *std::max_element(sizes.begin(), sizes.end()) - *std::min_element(sizes.begin(), sizes.end()) <= 1;
    if (n == 460) folds_ok = folds_ok && sizes == std::vector<std::size_t>(5, 92);
  }
  o.check(folds_ok, "folds disjoint, exhaustive, spread <= 1, 460 -> 5 x 92");

  const auto samples = data::synth_dataset(23, 16, 16, data::kDefaultBlobScale, 3);
  const evaluation::Trainer stub = [](std::span<const data::Sample>, const network::ExperimentConfig&,
                                      std::uint64_t seed) {
    evaluation::TrainedModel m;
    m.predict = [seed](const data::Sample& s) {
      ProbabilityMap p(s.label.height, s.label.width);
      for (std::size_t i = 0; i < p.values.size(); ++i) {
        const double noise = static_cast<double>(derive_seed(seed, i) % 1000) / 1000.0;
        p.values[i] = static_cast<float>(0.6 * noise + 0.35 * s.label.classes[i] + 0.02);
      }
      return p;
    };
    return m;
  };
  const auto grid = evaluation::ThresholdGrid::standard();
  const auto r = evaluation::run_crossval(samples, {}, {}, grid, 1, {}, stub);
  bool disjoint = true;
  for (const auto& m : r.models) {
    const std::set<std::string> train(m.train_ids.begin(), m.train_ids.end());
    for (const auto& id : m.test_ids) disjoint = disjoint && !train.count(id);
  }
  o.check(disjoint, "no model tests on its training samples");

  evaluation::CrossvalOptions two;
  two.folds = 2;
  const auto small = evaluation::run_crossval(std::span(samples).first(6), {}, {}, grid, 2, two, stub);
  bool averaged = true;
  for (std::size_t j = 0; j < grid.size(); ++j) {
    const auto& a = small.models[0].rows[j].metrics;
    const auto& b = small.models[1].rows[j].metrics;
    averaged = averaged && small.mix.rows[j].recall == (a.recall + b.recall) / 2.0 &&
               small.mix.rows[j].fall_out == (a.fall_out + b.fall_out) / 2.0;
  }
  o.check(averaged, "2-fold mean curve equals the hand average");
  o.detail << "fold plans for 460/23/10/7 samples, " << r.models.size() << "-model id bookkeeping, 2-fold hand average ";
}

void toy_learning(Outcome& o) {
  const auto all = data::synth_dataset(80, 64, 96, data::kDefaultBlobScale, 7);
  const std::span<const data::Sample> train_set = std::span(all).first(60);
  const std::span<const data::Sample> test_set = std::span(all).subspan(60);
  network::Model model(network::NetworkConfig::toy(64, 96, 8), 1);
  network::ExperimentConfig e;
  e.learning_rate = 1e-4;
  e.iterations = 1000;
  e.loss_cadence = 50;
  const auto history = network::train(model, train_set, e, 3);
  std::vector<ProbabilityMap> probs;
  std::vector<LabelMap> truths;
  for (const auto& s : test_set) {
    probs.push_back(network::segment(model, s.image));
    truths.push_back(s.label);
  }
  const double auc = evaluation::roc(evaluation::ThresholdGrid::standard(), probs, truths).auc;
  const double first = history.front().loss, last = history.back().loss;
  o.detail << "60 train / 20 test at 96x64, divisor 8, 1000 iterations at lr 1e-4: held-out AUC " << auc
           << ", loss " << first << " -> " << last << " (" << 100.0 * last / first << "% of initial) ";
  o.check(auc >= 0.95, "held-out AUC >= 0.95");
  o.check(last <= 0.5 * first, "final loss <= 50% of initial");
}

void frozen_round_trip(Outcome& o) {
  testing::TempDir dir("acceptance_frozen");
  const network::Model model(network::NetworkConfig::toy(64, 96, 8), 12);
  const auto path = dir / "model.frozen";
  network::freeze(model, path);
  const auto loaded = network::load_frozen(path);
  bool identical = true;
  for (std::uint64_t s = 0; s < 5; ++s) {
    const auto img = data::synth_sample(64, 96, data::kDefaultBlobScale, 500 + s).image;
    identical = identical && network::predict(loaded, img) == network::predict(model, img);
  }
  o.check(identical, "bit-identical maps on 5 images");

  std::ifstream in(path, std::ios::binary);
  const std::string bytes{std::istreambuf_iterator<char>(in), {}};
  auto rejects = [&](const std::string& content, network::FrozenModelError::Kind kind) {
    std::ofstream(dir / "bad.frozen", std::ios::binary | std::ios::trunc) << content;
    try {
      network::load_frozen(dir / "bad.frozen");
    } catch (const network::FrozenModelError& e) {
      return e.kind() == kind;
    }
    return false;
  };
  std::string flipped = bytes;
  flipped[flipped.size() / 2 + flipped.size() / 4] ^= 0x01;
  o.check(rejects(flipped, network::FrozenModelError::Kind::ChecksumMismatch), "flipped byte rejected");
  o.check(rejects(bytes.substr(0, bytes.size() - 100), network::FrozenModelError::Kind::Truncated), "truncation rejected");
  o.detail << "5 maps bit-identical, flipped byte and truncation rejected ";
}

void pipeline_semantics(Outcome& o) {
  pipeline::SimulatedSourceConfig sc;
  sc.rate_fps = 30;
  sc.duration_s = 10;
  sc.seed = 1;
  pipeline::SimulatedSource source(sc);
  const pipeline::Segmenter stub{[](const Image& img) { return ProbabilityMap(img.height, img.width, 0.5f); }, 0.1};
  const auto r = pipeline::run_pipeline(source, stub, {});
  const auto& c = r.counters;
  bool increasing = true;
  for (std::size_t i = 1; i < r.log.size(); ++i) increasing = increasing && r.log[i].frame_id > r.log[i - 1].frame_id;
  o.detail << "produced " << c.produced << ", segmented " << c.segmented << ", dropped " << c.dropped
           << ", in flight " << c.in_flight << ", achieved " << c.achieved_fps << " fps ";
  o.check(std::abs(c.achieved_fps - 10.0) <= 0.5, "achieved framerate 10 +/- 0.5");
  o.check(c.produced == c.segmented + c.dropped + c.in_flight && c.in_flight <= 1, "frame accounting");
  o.check(increasing, "frameIds strictly increase");
}

void uncertainty_properties(Outcome& o) {
  LabelMap a(20, 20);
  for (std::size_t i = 0; i < a.classes.size(); ++i) a.classes[i] = (i * 7) % 3 == 0;
  LabelMap flipped = a;
  for (auto& v : flipped.classes) v ^= 1;
  const double same = analysis::annotator_uncertainty({{a, a, a}}).area_fraction;
  const double opposite = analysis::annotator_uncertainty({{a, flipped}}).area_fraction;
  o.check(same == 0.0, "identical annotators: empty");
  o.check(opposite == 1.0, "complementary annotators: full");

  ProbabilityMap saturated(20, 20);
  for (std::size_t i = 0; i < saturated.values.size(); ++i) saturated.values[i] = i % 2 ? 0.999f : 0.001f;
  const double sat = analysis::network_uncertainty(saturated).area_fraction;
  const double half = analysis::network_uncertainty(ProbabilityMap(20, 20, 0.5f)).area_fraction;
  o.check(sat == 0.0, "saturated map: empty");
  o.check(half == 1.0, "constant 0.5 map: full");

  const auto f = testing::error_fraction_fixture();
  const auto frac = analysis::error_in_uncertainty_fraction(f.predicted, f.truth, f.uncertainty);
  o.check(frac.value == 0.6 && frac.misclassified == 10 && frac.inside == 6, "10-error / 6-inside fixture gives 0.6");
  o.detail << "areas " << same << "/" << opposite << "/" << sat << "/" << half << ", fixture fraction " << frac.value
           << " (case-study figures 94.6%/28.5%/18.9% are reference points only) ";
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, Criterion>> criteria{
      {"overlap reproduction", overlap_reproduction},
      {"metric exactness", metric_exactness},
      {"gradient fidelity", gradient_fidelity},
      {"bilinear initialization fidelity", bilinear_fidelity},
      {"ROC/AUC oracle equivalence", roc_oracle},
      {"cross-validation harness properties", crossval_properties},
      {"toy end-to-end learning", toy_learning},
      {"frozen-model round trip", frozen_round_trip},
      {"pipeline throughput and semantics", pipeline_semantics},
      {"uncertainty analysis properties", uncertainty_properties},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome outcome;
    const auto start = std::chrono::steady_clock::now();
    try {
      criteria[i].second(outcome);
    } catch (const std::exception& e) {
      outcome.pass = false;
      outcome.detail << "[exception: " << e.what() << "] ";
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    failures += outcome.pass ? 0 : 1;
    std::printf("%s %zu %s: %s(%.3f s)\n", outcome.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(),
                outcome.detail.str().c_str(), seconds);
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
