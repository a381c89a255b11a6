#include "seagrass/analysis/uncertainty.hpp"

#include <algorithm>

#include "seagrass/error.hpp"
#include "seagrass/evaluation/metrics.hpp"

namespace seagrass::analysis {

namespace {

UncertaintyMap finish(std::size_t h, std::size_t w, std::vector<std::uint8_t> flags) {
  UncertaintyMap map{h, w, std::move(flags), 0.0};
  const std::size_t total = h * w;
  map.area_fraction = total == 0 ? 0.0
                                 : static_cast<double>(map.uncertain_count()) / static_cast<double>(total);
  return map;
}

}  // namespace

std::size_t UncertaintyMap::uncertain_count() const {
  return static_cast<std::size_t>(std::count(uncertain.begin(), uncertain.end(), std::uint8_t{1}));
}

Image error_overlay(const Image& image, const LabelMap& predicted, const LabelMap& truth) {
  require(same_extents(image, predicted) && same_extents(image, truth),
          "error_overlay: image, prediction, and truth extents must match");
  Image out = image;
  for (std::size_t y = 0; y < image.height; ++y) {
    for (std::size_t x = 0; x < image.width; ++x) {
      const bool p = predicted.at(y, x) != 0;
      const bool t = truth.at(y, x) != 0;
      const float* tint = nullptr;
      if (t && !p) tint = kFalseNegativeRgb;
      if (p && !t) tint = kFalsePositiveRgb;
      if (!tint) continue;
      for (std::size_t c = 0; c < Image::kChannels; ++c) out.at(c, y, x) = tint[c];
    }
  }
  return out;
}

void AnnotatorSet::validate() const {
  require(maps.size() >= 2, "annotator set: need at least two label maps");
  for (const auto& m : maps) {
    require(same_extents(m, maps.front()), "annotator set: label map extents differ");
    require(std::all_of(m.classes.begin(), m.classes.end(), [](std::uint8_t c) { return c <= 1; }),
            "annotator set: label maps must be binary");
  }
}

GrayMap annotator_mean(const AnnotatorSet& set) {
  set.validate();
  const auto& first = set.maps.front();
  GrayMap mean(first.height, first.width);
  std::vector<std::size_t> votes(first.pixel_count(), 0);
  for (const auto& m : set.maps) {
    for (std::size_t i = 0; i < votes.size(); ++i) votes[i] += m.classes[i];
  }
  const double n = static_cast<double>(set.maps.size());
  for (std::size_t i = 0; i < votes.size(); ++i) {
    mean.values[i] = static_cast<float>(static_cast<double>(votes[i]) / n);
  }
  return mean;
}

UncertaintyMap annotator_uncertainty(const AnnotatorSet& set) {
  set.validate();
  const auto& first = set.maps.front();
  std::vector<std::uint8_t> flags(first.pixel_count(), 0);
  for (const auto& m : set.maps) {
    for (std::size_t i = 0; i < flags.size(); ++i) flags[i] |= m.classes[i] != first.classes[i] ? 1 : 0;
  }
  return finish(first.height, first.width, std::move(flags));
}

UncertaintyMap network_uncertainty(const ProbabilityMap& probabilities, double low, double high) {
  require(low > 0.0 && high < 1.0 && low < high, "network_uncertainty: need 0 < low < high < 1");
  const LabelMap at_low = evaluation::binarize(probabilities, low);
  const LabelMap at_high = evaluation::binarize(probabilities, high);
  std::vector<std::uint8_t> flags(probabilities.pixel_count());
  for (std::size_t i = 0; i < flags.size(); ++i) flags[i] = at_low.classes[i] != at_high.classes[i] ? 1 : 0;
  return finish(probabilities.height, probabilities.width, std::move(flags));
}

ErrorFraction error_in_uncertainty_fraction(const LabelMap& predicted, const LabelMap& truth,
                                            const UncertaintyMap& uncertainty) {
  require(same_extents(predicted, truth) && same_extents(predicted, uncertainty),
          "error_in_uncertainty_fraction: extents must match");
  ErrorFraction f;
  for (std::size_t i = 0; i < truth.classes.size(); ++i) {
    if ((predicted.classes[i] != 0) == (truth.classes[i] != 0)) continue;
    ++f.misclassified;
    if (uncertainty.uncertain[i]) ++f.inside;
  }
  if (f.misclassified == 0) {
    f.value = 1.0;
    f.degenerate = true;
  } else {
    f.value = static_cast<double>(f.inside) / static_cast<double>(f.misclassified);
  }
  return f;
}

GrayMap to_gray(const UncertaintyMap& map) {
  GrayMap g(map.height, map.width);
  for (std::size_t i = 0; i < map.uncertain.size(); ++i) g.values[i] = map.uncertain[i] ? 1.0f : 0.0f;
  return g;
}

}  // namespace seagrass::analysis
