#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "seagrass/data/dataset.hpp"
#include "seagrass/data/transforms.hpp"
#include "seagrass/network/model.hpp"

namespace seagrass::network {

/// One study case: the data-augmentation, learning-rate, and iteration axes.
struct ExperimentConfig {
  bool data_aug = false;
  double learning_rate = 1e-5;
  std::size_t iterations = 8000;
  std::size_t loss_cadence = 10;
  data::AugmentationConfig augmentation{};
};

/// lossValue is the mean single-sample loss over the iterations since the previous record.
struct TrainRecord {
  std::size_t iteration = 0;
  double loss = 0.0;
  double wall_clock_ms = 0.0;
};

using TrainObserver = std::function<void(const TrainRecord&)>;

/// Batch-1 training: each iteration draws one sample uniformly with the seeded generator,
/// optionally augments it, and performs forward, backward, and one Adam step.
/// Samples whose extents pad (to multiples of 32) to the model input are padded with
/// zero-weighted pixels.
std::vector<TrainRecord> train(Model& model, std::span<const data::Sample> train_set,
                               const ExperimentConfig& experiment, std::uint64_t seed,
                               const TrainObserver& observer = {});

}  // namespace seagrass::network
