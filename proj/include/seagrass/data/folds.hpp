#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace seagrass::data {

struct FoldPlan {
  std::size_t k = 5;
  std::map<std::string, std::size_t> assignment;

  /// Ids assigned to fold `index`, in ascending id order.
  std::vector<std::string> fold(std::size_t index) const;
  std::vector<std::size_t> fold_sizes() const;
};

/// Seeded Fisher-Yates shuffle followed by round-robin assignment.
FoldPlan make_folds(std::span<const std::string> sample_ids, std::size_t k, std::uint64_t seed);

}  // namespace seagrass::data
