#include "seagrass/network/train.hpp"

#include <chrono>

#include "seagrass/error.hpp"
#include "seagrass/rng.hpp"

namespace seagrass::network {

namespace {

struct PreparedSample {
  Image image;
  LabelMap label;
  std::vector<float> weights;  // empty when no padding was needed
};

PreparedSample prepare(const data::Sample& s, const NetworkConfig& config) {
  require(same_extents(s.image, s.label), "train: sample '" + s.id + "' image/label extents differ");
  if (s.image.height == config.input_height && s.image.width == config.input_width) {
    return {s.image, s.label, {}};
  }
  const auto padding = data::padding_for(s.image.height, s.image.width, kInputMultiple);
  PreparedSample p{data::pad(s.image, padding), data::pad(s.label, padding), {}};
  require(p.image.height == config.input_height && p.image.width == config.input_width,
          "train: sample '" + s.id + "' does not fit the model input extents");
  LabelMap inside(s.image.height, s.image.width, 1);
  const LabelMap mask = data::pad(inside, padding);
  p.weights.assign(mask.classes.begin(), mask.classes.end());
  // Keep the loss normalized by real pixels only.
  const float scale = static_cast<float>(mask.pixel_count()) / static_cast<float>(inside.pixel_count());
  for (auto& w : p.weights) w *= scale;
  return p;
}

}  // namespace

std::vector<TrainRecord> train(Model& model, std::span<const data::Sample> train_set,
                               const ExperimentConfig& experiment, std::uint64_t seed,
                               const TrainObserver& observer) {
  require(!train_set.empty(), "train: empty training set");
  require(experiment.iterations >= 1, "train: iterations must be at least 1");
  require(experiment.loss_cadence >= 1, "train: loss cadence must be at least 1");
  require(experiment.learning_rate > 0.0, "train: learning rate must be positive");
  require(!model.inference_only(), "train: model was loaded as inference-only");
  if (experiment.data_aug) experiment.augmentation.validate();

  std::vector<PreparedSample> samples;
  samples.reserve(train_set.size());
  for (const auto& s : train_set) samples.push_back(prepare(s, model.config()));

  Rng sampler(derive_seed(seed, "train.sampler"));
  const std::uint64_t aug_seed = derive_seed(seed, "train.augment");
  const std::uint64_t dropout_seed = derive_seed(seed, "train.dropout");
  const numerics::AdamOptions adam{experiment.learning_rate};

  std::vector<TrainRecord> records;
  const auto start = std::chrono::steady_clock::now();
  double window_loss = 0.0;
  std::size_t window_count = 0;
  for (std::size_t it = 1; it <= experiment.iterations; ++it) {
    const PreparedSample& s = samples[static_cast<std::size_t>(sampler() % samples.size())];
    const Image image = experiment.data_aug
                            ? data::augment(s.image, experiment.augmentation, derive_seed(aug_seed, it))
                            : s.image;
    auto pass = forward(model, image, true, derive_seed(dropout_seed, it));
    const float loss = backward(model, pass.cache, s.label, std::span<const float>(s.weights));
    numerics::adam_step(model.params(), adam);
    model.mark_updated();
    window_loss += loss;
    ++window_count;
    if (it % experiment.loss_cadence == 0 || it == experiment.iterations) {
      const auto elapsed = std::chrono::steady_clock::now() - start;
      TrainRecord rec{it, window_loss / static_cast<double>(window_count),
                      std::chrono::duration<double, std::milli>(elapsed).count()};
      records.push_back(rec);
      if (observer) observer(rec);
      window_loss = 0.0;
      window_count = 0;
    }
  }
  return records;
}

}  // namespace seagrass::network
