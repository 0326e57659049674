#pragma once

// Naive reference implementations and toy data shared by the unit tests and
// the acceptance runner. Nothing here calls into the library's metric code.

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "catrec/embedding.hpp"
#include "catrec/ingest.hpp"
#include "catrec/rng.hpp"

namespace catrec::testing {

// Relevance flags of the first min(k, |preds|) predictions, by linear scan.
inline std::vector<int> naive_relevance(const std::vector<Index>& preds, const std::vector<Index>& truth,
                                        std::size_t k) {
  std::vector<int> rel;
  for (std::size_t i = 0; i < preds.size() && i < k; ++i) {
    int hit = 0;
    for (auto t : truth) {
      if (t == preds[i]) hit = 1;
    }
    rel.push_back(hit);
  }
  return rel;
}

inline double naive_ndcg(const std::vector<Index>& preds, const std::vector<Index>& truth, std::size_t k) {
  const auto rel = naive_relevance(preds, truth, k);
  double dcg = 0;
  for (std::size_t pos = 1; pos <= rel.size(); ++pos) dcg += rel[pos - 1] / std::log2(pos + 1.0);
  double idcg = 0;
  std::size_t ideal = truth.size() < k ? truth.size() : k;
  for (std::size_t pos = 1; pos <= ideal; ++pos) idcg += 1 / std::log2(pos + 1.0);
  return dcg / idcg;
}

inline double naive_hr(const std::vector<Index>& preds, const std::vector<Index>& truth, std::size_t k) {
  double hits = 0;
  for (int r : naive_relevance(preds, truth, k)) hits += r;
  return hits / truth.size();
}

inline double naive_mrr(const std::vector<Index>& preds, const std::vector<Index>& truth, std::size_t k) {
  const auto rel = naive_relevance(preds, truth, k);
  for (std::size_t pos = 1; pos <= rel.size(); ++pos) {
    if (rel[pos - 1]) return 1.0 / pos;
  }
  return 0;
}

inline double naive_map(const std::vector<Index>& preds, const std::vector<Index>& truth, std::size_t k) {
  const auto rel = naive_relevance(preds, truth, k);
  double sum = 0;
  for (std::size_t i = 1; i <= rel.size(); ++i) {
    if (!rel[i - 1]) continue;
    double seen = 0;
    for (std::size_t j = 1; j <= i; ++j) seen += rel[j - 1];
    sum += seen / i;
  }
  return sum / static_cast<double>(truth.size() < k ? truth.size() : k);
}

// Builds the (FPR, TPR) polyline explicitly and integrates it.
inline double naive_lauc(const std::vector<Index>& preds, const std::vector<Index>& truth, std::size_t k,
                         std::size_t n) {
  const auto rel = naive_relevance(preds, truth, k);
  std::vector<double> xs{0}, ys{0};
  for (std::size_t i = 1; i <= rel.size(); ++i) {
    double hits = 0;
    for (std::size_t j = 0; j < i; ++j) hits += rel[j];
    ys.push_back(hits / truth.size());
    xs.push_back((i - hits) / (n - truth.size()));
  }
  xs.push_back(1);
  ys.push_back(1);
  double area = 0;
  for (std::size_t i = 1; i < xs.size(); ++i) area += (xs[i] - xs[i - 1]) * (ys[i] + ys[i - 1]) / 2;
  return area;
}

struct MetricInstance {
  std::vector<Index> preds;
  std::vector<Index> truth;  // sorted
  std::size_t k = 1;
  std::size_t n = 2;
};

// Random catalog of 2..40 items, a random permutation prefix as predictions
// and a random proper subset as truth.
inline MetricInstance random_instance(Rng& rng) {
  MetricInstance x;
  x.n = 2 + rng.index(39);
  std::vector<Index> perm(x.n);
  for (std::size_t i = 0; i < x.n; ++i) perm[i] = static_cast<Index>(i);
  rng.shuffle(perm.begin(), perm.end());
  x.preds.assign(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(1 + rng.index(x.n)));
  const std::size_t t = 1 + rng.index(x.n - 1);
  rng.shuffle(perm.begin(), perm.end());
  x.truth.assign(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(t));
  std::sort(x.truth.begin(), x.truth.end());
  x.k = 1 + rng.index(x.n + 3);
  return x;
}

// Two user groups with disjoint category sets, joined by a single bridge
// purchase. Users gA<i> buy catA<j>, users gB<i> buy catB<j>.
inline ingest::TransactionLog two_community_log(std::size_t users_per_side = 12, std::size_t cats_per_side = 6,
                                                std::uint64_t seed = 5) {
  Rng rng(seed);
  ingest::TransactionLog log;
  Timestamp t = 1'000'000;
  for (const char side : {'A', 'B'}) {
    for (std::size_t u = 0; u < users_per_side; ++u) {
      const std::string user = std::string("g") + side + std::to_string(u);
      for (int b = 0; b < 8; ++b) {
        const std::string basket = user + "_" + std::to_string(b);
        for (int j = 0; j < 3; ++j) {
          const std::string cat = std::string("cat") + side + std::to_string(rng.index(cats_per_side));
          log.records.push_back({user, basket, cat, t += 60});
        }
      }
    }
  }
  log.records.push_back({"gA0", "bridge", "catB0", t += 60});
  ingest::sort_log(log);
  return log;
}

// Mean cosine over same-side user/category pairs minus the mean over
// cross-side pairs, for embeddings trained on two_community_log().
inline double community_gap(const EmbeddingTable& table, const ingest::IdMaps& maps) {
  std::vector<std::pair<std::vector<double>, char>> points;
  for (std::size_t r = 0; r < table.size(); ++r) {
    const auto node = table.nodes()[r];
    std::string name;
    if (node.type == NodeType::user) name = maps.users.name(node.index).substr(1);
    else if (node.type == NodeType::category) name = maps.categories.name(node.index).substr(3);
    else continue;
    const auto row = table.row(r);
    points.emplace_back(std::vector<double>(row.begin(), row.end()), name[0]);
  }
  auto cos = [](const std::vector<double>& a, const std::vector<double>& b) {
    double ab = 0, aa = 0, bb = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
      ab += a[i] * b[i];
      aa += a[i] * a[i];
      bb += b[i] * b[i];
    }
    return ab / std::sqrt(aa * bb);
  };
  double intra = 0, inter = 0;
  std::size_t ni = 0, nx = 0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    for (std::size_t j = i + 1; j < points.size(); ++j) {
      const double c = cos(points[i].first, points[j].first);
      if (points[i].second == points[j].second) {
        intra += c;
        ++ni;
      } else {
        inter += c;
        ++nx;
      }
    }
  }
  return intra / ni - inter / nx;
}

}  // namespace catrec::testing
