#include "catrec/evalkit.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace catrec::eval {

namespace {

void check(std::span<const Index> truth, std::size_t k) {
  if (truth.empty()) throw DataError("empty ground truth");
  if (k == 0) throw ConfigError("k must be >= 1");
}

bool relevant(std::span<const Index> truth, Index q) { return std::binary_search(truth.begin(), truth.end(), q); }

std::size_t cutoff(std::span<const Index> predictions, std::size_t k) { return std::min(k, predictions.size()); }

}  // namespace

const char* metric_name(Metric m) noexcept {
  switch (m) {
    case Metric::ndcg: return "NDCG";
    case Metric::hit_rate: return "HR";
    case Metric::mrr: return "MRR";
    case Metric::map: return "MAP";
    case Metric::lauc: return "LAUC";
  }
  return "?";
}

double ndcg_at_k(std::span<const Index> predictions, std::span<const Index> truth, std::size_t k) {
  check(truth, k);
  double dcg = 0.0, idcg = 0.0;
  for (std::size_t i = 0; i < cutoff(predictions, k); ++i) {
    if (relevant(truth, predictions[i])) dcg += 1.0 / std::log2(static_cast<double>(i) + 2.0);
  }
  for (std::size_t i = 0; i < std::min(truth.size(), k); ++i) idcg += 1.0 / std::log2(static_cast<double>(i) + 2.0);
  return dcg / idcg;
}

double hit_rate_at_k(std::span<const Index> predictions, std::span<const Index> truth, std::size_t k) {
  check(truth, k);
  std::size_t hits = 0;
  for (std::size_t i = 0; i < cutoff(predictions, k); ++i) hits += relevant(truth, predictions[i]);
  return static_cast<double>(hits) / static_cast<double>(truth.size());
}

double mrr_at_k(std::span<const Index> predictions, std::span<const Index> truth, std::size_t k) {
  check(truth, k);
  for (std::size_t i = 0; i < cutoff(predictions, k); ++i) {
    if (relevant(truth, predictions[i])) return 1.0 / static_cast<double>(i + 1);
  }
  return 0.0;
}

double map_at_k(std::span<const Index> predictions, std::span<const Index> truth, std::size_t k) {
  check(truth, k);
  std::size_t hits = 0;
  double sum = 0.0;
  for (std::size_t i = 0; i < cutoff(predictions, k); ++i) {
    if (relevant(truth, predictions[i])) {
      ++hits;
      sum += static_cast<double>(hits) / static_cast<double>(i + 1);
    }
  }
  return sum / static_cast<double>(std::min(truth.size(), k));
}

double lauc_at_k(std::span<const Index> predictions, std::span<const Index> truth, std::size_t k, std::size_t n) {
  check(truth, k);
  if (truth.size() >= n) throw DataError("ground truth covers the whole catalog");
  const double pos = static_cast<double>(truth.size());
  const double neg = static_cast<double>(n - truth.size());
  double area = 0.0, fpr = 0.0, tpr = 0.0;
  std::size_t hits = 0;
  for (std::size_t i = 0; i < cutoff(predictions, k); ++i) {
    hits += relevant(truth, predictions[i]);
    const double next_tpr = static_cast<double>(hits) / pos;
    const double next_fpr = static_cast<double>(i + 1 - hits) / neg;
    area += (next_fpr - fpr) * (tpr + next_tpr) * 0.5;
    fpr = next_fpr;
    tpr = next_tpr;
  }
  area += (1.0 - fpr) * (tpr + 1.0) * 0.5;
  return area;
}

double metric_at_k(Metric m, std::span<const Index> predictions, std::span<const Index> truth, std::size_t k,
                   std::size_t n) {
  switch (m) {
    case Metric::ndcg: return ndcg_at_k(predictions, truth, k);
    case Metric::hit_rate: return hit_rate_at_k(predictions, truth, k);
    case Metric::mrr: return mrr_at_k(predictions, truth, k);
    case Metric::map: return map_at_k(predictions, truth, k);
    case Metric::lauc: return lauc_at_k(predictions, truth, k, n);
  }
  return 0.0;
}

std::size_t GroundTruth::evaluable_users() const noexcept {
  return static_cast<std::size_t>(
      std::count_if(per_user.begin(), per_user.end(), [](const auto& t) { return !t.empty(); }));
}

GroundTruth build_ground_truth(const ingest::TransactionLog& test, const ingest::IdMaps& maps) {
  GroundTruth g;
  g.per_user.resize(maps.users.size());
  for (const auto& r : test.records) {
    const auto p = maps.users.find(r.user_id);
    const auto q = maps.categories.find(r.category_id);
    if (p && q) g.per_user[*p].push_back(*q);
  }
  for (auto& t : g.per_user) {
    std::sort(t.begin(), t.end());
    t.erase(std::unique(t.begin(), t.end()), t.end());
  }
  return g;
}

double EvalReport::mean(Metric m, std::size_t k) const {
  const auto it = std::find(ks.begin(), ks.end(), k);
  if (it == ks.end()) throw ConfigError("k = " + std::to_string(k) + " not in report");
  return means[static_cast<std::size_t>(m)][static_cast<std::size_t>(it - ks.begin())];
}

EvalReport evaluate(const RankFn& rank, const GroundTruth& truth, const std::vector<std::size_t>& ks,
                    std::size_t n) {
  if (ks.empty()) throw ConfigError("no cutoffs given");
  EvalReport r;
  r.ks = ks;
  r.means.assign(kMetricCount, std::vector<double>(ks.size(), 0.0));
  for (std::size_t p = 0; p < truth.per_user.size(); ++p) {
    const auto& t = truth.per_user[p];
    if (t.empty()) continue;
    const auto preds = rank(static_cast<Index>(p));
    for (std::size_t mi = 0; mi < kMetricCount; ++mi) {
      for (std::size_t ki = 0; ki < ks.size(); ++ki) r.means[mi][ki] += metric_at_k(kAllMetrics[mi], preds, t, ks[ki], n);
    }
    ++r.users;
  }
  if (r.users == 0) throw DataError("no user has test purchases to evaluate");
  for (auto& row : r.means) {
    for (double& v : row) v /= static_cast<double>(r.users);
  }
  return r;
}

std::string format_report_table(const std::vector<std::string>& models, const std::vector<EvalReport>& reports,
                                char delimiter) {
  if (models.size() != reports.size()) throw ConfigError("model names and reports differ in length");
  if (reports.empty()) throw ConfigError("no reports to format");
  std::string out = "metric";
  for (const auto& m : models) out += delimiter + m;
  out += '\n';
  const auto& ks = reports.front().ks;
  for (const auto& r : reports) {
    if (r.ks != ks) throw ConfigError("reports use different cutoffs");
  }
  for (std::size_t mi = 0; mi < kMetricCount; ++mi) {
    for (std::size_t ki = 0; ki < ks.size(); ++ki) {
      out += std::string(metric_name(kAllMetrics[mi])) + "@" + std::to_string(ks[ki]);
      for (const auto& r : reports) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.6f", r.means[mi][ki]);
        out += delimiter;
        out += buf;
      }
      out += '\n';
    }
  }
  return out;
}

}  // namespace catrec::eval
