#pragma once

// Top-k ranking metrics with binary relevance, and the evaluation harness
// that averages them over test users.

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "catrec/common.hpp"
#include "catrec/ingest.hpp"

namespace catrec::eval {

enum class Metric { ndcg, hit_rate, mrr, map, lauc };

constexpr std::size_t kMetricCount = 5;
constexpr Metric kAllMetrics[kMetricCount] = {Metric::ndcg, Metric::hit_rate, Metric::mrr, Metric::map,
                                              Metric::lauc};

// "NDCG", "HR", "MRR", "MAP", "LAUC"
const char* metric_name(Metric m) noexcept;

// `truth` is a sorted, duplicate-free list of category indices. Predictions
// must be duplicate-free. All functions throw DataError on empty truth and
// ConfigError on k = 0.
double ndcg_at_k(std::span<const Index> predictions, std::span<const Index> truth, std::size_t k);
double hit_rate_at_k(std::span<const Index> predictions, std::span<const Index> truth, std::size_t k);
double mrr_at_k(std::span<const Index> predictions, std::span<const Index> truth, std::size_t k);
double map_at_k(std::span<const Index> predictions, std::span<const Index> truth, std::size_t k);
// n = catalog size; throws DataError when truth covers the whole catalog.
double lauc_at_k(std::span<const Index> predictions, std::span<const Index> truth, std::size_t k, std::size_t n);

double metric_at_k(Metric m, std::span<const Index> predictions, std::span<const Index> truth, std::size_t k,
                   std::size_t n);

/// Per-user sorted category sets from the test window. Test records whose
/// user or category is unknown to the maps are ignored.
struct GroundTruth {
  std::vector<std::vector<Index>> per_user;  // indexed by user; may be empty

  std::size_t evaluable_users() const noexcept;
};

GroundTruth build_ground_truth(const ingest::TransactionLog& test, const ingest::IdMaps& maps);

struct EvalReport {
  std::vector<std::size_t> ks;
  std::vector<std::vector<double>> means;  // [metric][k index]
  std::size_t users = 0;

  double mean(Metric m, std::size_t k) const;
};

// Returns the ranked list for user p; at least max(ks) long.
using RankFn = std::function<std::vector<Index>(Index p)>;

// Averages all metrics over users with non-empty truth, in index order.
// Throws DataError when no user is evaluable.
EvalReport evaluate(const RankFn& rank, const GroundTruth& truth, const std::vector<std::size_t>& ks,
                    std::size_t n);

/// Delimited table: one row per (metric, k), one column per model.
std::string format_report_table(const std::vector<std::string>& models, const std::vector<EvalReport>& reports,
                                char delimiter = '\t');

}  // namespace catrec::eval
