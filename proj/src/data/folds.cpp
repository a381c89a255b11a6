#include "seagrass/data/folds.hpp"

#include <set>
#include <utility>

#include "seagrass/error.hpp"
#include "seagrass/rng.hpp"

namespace seagrass::data {

std::vector<std::string> FoldPlan::fold(std::size_t index) const {
  std::vector<std::string> ids;
  for (const auto& [id, f] : assignment) {
    if (f == index) ids.push_back(id);
  }
  return ids;
}

std::vector<std::size_t> FoldPlan::fold_sizes() const {
  std::vector<std::size_t> sizes(k, 0);
  for (const auto& [id, f] : assignment) ++sizes.at(f);
  return sizes;
}

FoldPlan make_folds(std::span<const std::string> sample_ids, std::size_t k, std::uint64_t seed) {
  require(k >= 2, "make_folds: k must be at least 2");
  require(sample_ids.size() >= k, "make_folds: " + std::to_string(sample_ids.size()) +
                                      " samples cannot fill " + std::to_string(k) + " folds");
  require(std::set<std::string>(sample_ids.begin(), sample_ids.end()).size() == sample_ids.size(),
          "make_folds: sample ids must be unique");
  std::vector<std::string> order(sample_ids.begin(), sample_ids.end());
  Rng rng(seed);
  for (std::size_t i = order.size(); i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(rng() % i);
    std::swap(order[i - 1], order[j]);
  }
  FoldPlan plan;
  plan.k = k;
  for (std::size_t i = 0; i < order.size(); ++i) plan.assignment[order[i]] = i % k;
  return plan;
}

}  // namespace seagrass::data
