#pragma once

#include <algorithm>
#include <numeric>
#include <span>
#include <vector>

#include "catrec/common.hpp"

namespace catrec {

// Indices of the k highest scores, descending; ties broken by ascending
// index. Entries flagged in `exclude` are skipped. Returns fewer than k
// when not enough candidates remain.
inline std::vector<Index> top_k(std::span<const double> scores, std::size_t k,
                                const std::vector<bool>* exclude = nullptr) {
  std::vector<Index> idx;
  idx.reserve(scores.size());
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (!exclude || i >= exclude->size() || !(*exclude)[i]) idx.push_back(static_cast<Index>(i));
  }
  k = std::min(k, idx.size());
  const auto better = [&](Index a, Index b) { return scores[a] != scores[b] ? scores[a] > scores[b] : a < b; };
  std::partial_sort(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(k), idx.end(), better);
  idx.resize(k);
  return idx;
}

}  // namespace catrec
