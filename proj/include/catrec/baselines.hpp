#pragma once

// Comparison recommenders: ItemPop, implicit-feedback ALS, BPR and plain
// metapath2vec inner products. All four share one representation:
//   score(p, q) = user_p . item_q + bias_q
// ItemPop uses dim = 0 and the popularity counts as bias.

#include <filesystem>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "catrec/embedding.hpp"
#include "catrec/ingest.hpp"
#include "catrec/sparse.hpp"

namespace catrec::baselines {

enum class Variant { pop, mf, bpr, m2v };

// "pop", "mf", "bpr", "m2v"
const char* variant_key(Variant v) noexcept;
// "Pop", "MF", "BPR", "M2V"
const char* variant_label(Variant v) noexcept;
std::optional<Variant> parse_variant(std::string_view key) noexcept;

struct BaselineModel {
  Variant variant = Variant::pop;
  std::size_t users = 0;
  std::size_t categories = 0;
  std::size_t dim = 0;
  std::vector<double> user_factors;  // users x dim, row-major
  std::vector<double> item_factors;  // categories x dim, row-major
  std::vector<double> item_bias;     // categories

  std::span<const double> user(Index p) const { return {user_factors.data() + p * dim, dim}; }
  std::span<const double> item(Index q) const { return {item_factors.data() + q * dim, dim}; }

  double score(Index p, Index q) const;
  std::vector<double> scores(Index p) const;

  friend bool operator==(const BaselineModel&, const BaselineModel&) = default;
};

// Column sums of a user x category count matrix.
BaselineModel itempop_fit(const SparseMatrix& counts);
// Purchase counts per category over the training log.
BaselineModel itempop_fit(const ingest::TransactionLog& train, const ingest::IdMaps& maps);

struct AlsConfig {
  std::size_t factors = 64;
  double regularization = 0.01;
  double confidence_alpha = 40.0;
  std::size_t iterations = 15;
  std::uint64_t seed = 1;

  void validate() const;
};

struct AlsResult {
  BaselineModel model;
  std::vector<double> objective;  // after each full sweep
};

/// Implicit ALS with confidence c = 1 + alpha * T and preference 1[T > 0].
/// Throws DataError if a normal-equation system is not positive definite.
AlsResult als_fit(const SparseMatrix& transactions, const AlsConfig& config);

// sum_pq c_pq (pref_pq - x_p . y_q)^2 + reg (|X|^2 + |Y|^2)
double als_objective(const SparseMatrix& transactions, const BaselineModel& model, const AlsConfig& config);

struct BprConfig {
  std::size_t factors = 64;
  double learning_rate = 0.05;
  double regularization = 0.01;
  std::size_t epochs = 30;
  std::uint64_t seed = 1;

  void validate() const;
};

struct BprResult {
  BaselineModel model;
  std::vector<double> epoch_loss;  // mean triple loss
};

/// -ln s(x_pi - x_pj) + reg/2 (|u_p|^2 + |y_i|^2 + |y_j|^2 + b_i^2 + b_j^2)
double bpr_triple_loss(const BaselineModel& m, Index p, Index i, Index j, double reg);

struct BprGradient {
  double loss = 0.0;
  double weight = 0.0;  // s(-(x_pi - x_pj))
  std::vector<double> user, pos, neg;
  double pos_bias = 0.0;
  double neg_bias = 0.0;
};

BprGradient bpr_triple_gradient(const BaselineModel& m, Index p, Index i, Index j, double reg);

// One uniformly sampled (user, positive, negative) triple per observed entry
// per epoch. Throws DataError if a user has no positive or no negative.
BprResult bpr_fit(const SparseMatrix& transactions, const BprConfig& config);

/// Inner products of skip-gram user and category vectors. Throws DataError if
/// any user or category is absent from the table.
BaselineModel m2v_model(const EmbeddingTable& table, std::size_t users, std::size_t categories);
double m2v_score(const EmbeddingTable& table, Index p, Index q);

// Directory layout: manifest.txt, bias.emb, and users.emb/items.emb when dim > 0.
void save_model(const std::filesystem::path& dir, const BaselineModel& m);
BaselineModel load_model(const std::filesystem::path& dir);

}  // namespace catrec::baselines
