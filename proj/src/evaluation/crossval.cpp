#include "seagrass/evaluation/crossval.hpp"

#include <algorithm>
#include <future>
#include <memory>
#include <set>

#include "seagrass/data/folds.hpp"
#include "seagrass/error.hpp"
#include "seagrass/rng.hpp"

namespace seagrass::evaluation {

std::vector<ThresholdRow> evaluate_maps(std::span<const ProbabilityMap> probabilities,
                                        std::span<const LabelMap> truths,
                                        const ThresholdGrid& grid, Averaging averaging) {
  const auto counts = pooled_counts(grid, probabilities, truths);
  std::vector<ThresholdRow> rows;
  for (std::size_t j = 0; j < grid.size(); ++j) {
    ThresholdRow row{grid.thresholds[j], counts[j], metrics(counts[j])};
    if (averaging == Averaging::Macro && !probabilities.empty()) {
      MetricSet mean;
      for (std::size_t m = 0; m < probabilities.size(); ++m) {
        const MetricSet one = metrics(confusion(binarize(probabilities[m], grid.thresholds[j]), truths[m]));
        mean.accuracy += one.accuracy;
        mean.precision += one.precision;
        mean.recall += one.recall;
        mean.fall_out += one.fall_out;
        mean.degenerate.accuracy |= one.degenerate.accuracy;
        mean.degenerate.precision |= one.degenerate.precision;
        mean.degenerate.recall |= one.degenerate.recall;
        mean.degenerate.fall_out |= one.degenerate.fall_out;
      }
      const double n = static_cast<double>(probabilities.size());
      mean.accuracy /= n;
      mean.precision /= n;
      mean.recall /= n;
      mean.fall_out /= n;
      mean.trade_off = trade_off(mean.recall, mean.fall_out);
      row.metrics = mean;
    }
    rows.push_back(row);
  }
  return rows;
}

std::vector<ThresholdRow> evaluate_predictor(const Predictor& predictor,
                                             std::span<const data::Sample> samples,
                                             const ThresholdGrid& grid, Averaging averaging) {
  std::vector<ProbabilityMap> probs;
  std::vector<LabelMap> truths;
  probs.reserve(samples.size());
  truths.reserve(samples.size());
  for (const auto& s : samples) {
    probs.push_back(predictor(s));
    require(same_extents(probs.back(), s.label),
            "evaluate: prediction extents differ from the label of sample '" + s.id + "'");
    truths.push_back(s.label);
  }
  return evaluate_maps(probs, truths, grid, averaging);
}

MeanCurve mean_curve(std::span<const std::vector<ThresholdRow>> tables) {
  require(!tables.empty(), "mean_curve: no model tables");
  const std::size_t n = tables.front().size();
  MeanCurve curve;
  std::vector<RocPoint> points;
  for (std::size_t j = 0; j < n; ++j) {
    MeanRow row;
    row.threshold = tables.front()[j].threshold;
    for (const auto& t : tables) {
      require(t.size() == n, "mean_curve: tables disagree on the threshold grid");
      row.accuracy += t[j].metrics.accuracy;
      row.precision += t[j].metrics.precision;
      row.recall += t[j].metrics.recall;
      row.fall_out += t[j].metrics.fall_out;
    }
    const double k = static_cast<double>(tables.size());
    row.accuracy /= k;
    row.precision /= k;
    row.recall /= k;
    row.fall_out /= k;
    row.trade_off = trade_off(row.recall, row.fall_out);
    curve.rows.push_back(row);
    points.push_back({row.threshold, row.fall_out, row.recall});
  }
  curve.roc = make_curve(std::move(points));
  std::vector<double> trade_offs;
  for (const auto& r : curve.rows) trade_offs.push_back(r.trade_off);
  curve.optimal = optimal_threshold(std::span<const double>(trade_offs));
  return curve;
}

namespace {

std::vector<data::Sample> select(std::span<const data::Sample> samples, const data::FoldPlan& plan,
                                 const std::set<std::size_t>& folds) {
  std::vector<data::Sample> out;
  for (const auto& s : samples) {
    if (folds.count(plan.assignment.at(s.id))) out.push_back(s);
  }
  return out;
}

std::vector<std::string> ids_of(const std::vector<data::Sample>& samples) {
  std::vector<std::string> ids;
  for (const auto& s : samples) ids.push_back(s.id);
  return ids;
}

ModelTable run_fold(std::size_t fold, std::span<const data::Sample> samples,
                    std::span<const data::Sample> extra, const data::FoldPlan& plan,
                    const ExperimentConfig& experiment, const ThresholdGrid& grid,
                    std::uint64_t seed, const CrossvalOptions& options, const Trainer& trainer) {
  const std::size_t k = options.folds;
  const bool validate = options.selection == SelectionSource::Validation;
  const std::size_t validation_fold = (fold + 1) % k;
  std::set<std::size_t> train_folds;
  for (std::size_t f = 0; f < k; ++f) {
    if (f != fold && !(validate && f == validation_fold)) train_folds.insert(f);
  }
  const auto train_set = select(samples, plan, train_folds);
  const auto test_set = select(samples, plan, {fold});

  ModelTable table;
  table.fold = fold;
  table.train_ids = ids_of(train_set);
  table.test_ids = ids_of(test_set);
  std::vector<std::string> train_sorted = table.train_ids;
  std::vector<std::string> test_sorted = table.test_ids;
  std::sort(train_sorted.begin(), train_sorted.end());
  std::sort(test_sorted.begin(), test_sorted.end());
  std::vector<std::string> overlap;
  std::set_intersection(train_sorted.begin(), train_sorted.end(), test_sorted.begin(),
                        test_sorted.end(), std::back_inserter(overlap));
  if (!overlap.empty()) throw std::logic_error("cross-validation would test on training sample " + overlap[0]);

  try {
    TrainedModel model = trainer(train_set, experiment, derive_seed(seed, fold));
    table.history = std::move(model.history);
    table.rows = evaluate_predictor(model.predict, test_set, grid, options.averaging);
    if (!extra.empty()) table.extra_rows = evaluate_predictor(model.predict, extra, grid, options.averaging);
    if (validate) {
      const auto validation_set = select(samples, plan, {validation_fold});
      table.validation_ids = ids_of(validation_set);
      table.validation_rows = evaluate_predictor(model.predict, validation_set, grid, options.averaging);
    }
  } catch (const CrossvalError&) {
    throw;
  } catch (const std::exception& e) {
    throw CrossvalError(fold, e.what());
  }
  return table;
}

}  // namespace

ExperimentResult run_crossval(std::span<const data::Sample> samples,
                              std::span<const data::Sample> extra,
                              const ExperimentConfig& experiment, const ThresholdGrid& grid,
                              std::uint64_t seed, const CrossvalOptions& options,
                              const Trainer& trainer) {
  grid.validate();
  require(options.folds >= 2, "run_crossval: fold count must be at least 2");
  require(samples.size() >= options.folds, "run_crossval: fewer samples than folds");
  require(options.selection == SelectionSource::Test || options.folds >= 3,
          "run_crossval: validation selection needs at least 3 folds");
  require(static_cast<bool>(trainer), "run_crossval: no trainer");

  std::vector<std::string> ids;
  for (const auto& s : samples) ids.push_back(s.id);
  const data::FoldPlan plan = data::make_folds(ids, options.folds, derive_seed(seed, "folds"));

  ExperimentResult result;
  result.config = experiment;
  result.grid = grid;
  result.options = options;
  if (options.parallel) {
    std::vector<std::future<ModelTable>> jobs;
    for (std::size_t f = 0; f < options.folds; ++f) {
      jobs.push_back(std::async(std::launch::async, [&, f] {
        return run_fold(f, samples, extra, plan, experiment, grid, seed, options, trainer);
      }));
    }
    for (auto& j : jobs) result.models.push_back(j.get());
  } else {
    for (std::size_t f = 0; f < options.folds; ++f) {
      result.models.push_back(run_fold(f, samples, extra, plan, experiment, grid, seed, options, trainer));
    }
  }

  auto collect = [&](auto member) {
    std::vector<std::vector<ThresholdRow>> tables;
    for (const auto& m : result.models) tables.push_back(m.*member);
    return mean_curve(tables);
  };
  result.mix = collect(&ModelTable::rows);
  if (!extra.empty()) result.extra = collect(&ModelTable::extra_rows);
  if (options.selection == SelectionSource::Validation) {
    result.validation = collect(&ModelTable::validation_rows);
    result.optimal_index = result.validation->optimal.index;
  } else {
    result.optimal_index = result.mix.optimal.index;
  }
  result.auc = result.mix.roc.auc;
  return result;
}

Trainer network_trainer(const network::NetworkConfig& config) {
  return [config](std::span<const data::Sample> train_set, const ExperimentConfig& experiment,
                  std::uint64_t seed) {
    auto model = std::make_shared<network::Model>(config, derive_seed(seed, "init"));
    TrainedModel out;
    out.history = network::train(*model, train_set, experiment, derive_seed(seed, "train"));
    out.predict = [model](const data::Sample& s) { return network::segment(*model, s.image); };
    return out;
  };
}

}  // namespace seagrass::evaluation
