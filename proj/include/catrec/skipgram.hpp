#pragma once

// Heterogeneous skip-gram with negative sampling over metapath walks.

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "catrec/embedding.hpp"
#include "catrec/hetgraph.hpp"
#include "catrec/rng.hpp"

namespace catrec::skipgram {

struct SgnsConfig {
  std::size_t dim = 64;
  std::size_t window = 2;
  std::size_t negatives = 5;
  std::size_t epochs = 5;
  double lr_start = 0.025;
  double lr_end = 0.0001;
  double unigram_power = 0.75;
  std::uint64_t seed = 1;

  void validate() const;
};

struct ContextPair {
  NodeRef center;
  NodeRef context;
  friend bool operator==(const ContextPair&, const ContextPair&) = default;
};

// Every ordered (center, other) pair with 0 < |position delta| <= window.
std::vector<ContextPair> extract_contexts(const hetgraph::Walk& walk, std::size_t window);

// Exact softmax of X_context . X_center over every node in the table.
double softmax_prob(const EmbeddingTable& table, NodeRef context, NodeRef center);

/// Center ("input") vectors and context ("output") vectors over the same
/// node set. The input table is the exported embedding.
struct SkipGramTables {
  EmbeddingTable input;
  EmbeddingTable output;
};

struct SgnsGradient {
  std::vector<double> center;                  // d loss / d input[center]
  std::vector<double> context;                 // d loss / d output[context]
  std::vector<std::vector<double>> negatives;  // d loss / d output[negative_k]
};

// -log s(o_c . x_v) - sum_k log s(-o_k . x_v), rows given as table rows.
double sgns_loss(const SkipGramTables& t, std::size_t center, std::size_t context,
                 std::span<const std::size_t> negatives);

double sgns_gradient(const SkipGramTables& t, std::size_t center, std::size_t context,
                     std::span<const std::size_t> negatives, SgnsGradient& grad);

// One SGD step of size lr on the loss above; returns the pre-step loss.
// Throws DivergenceError on a non-finite loss; ConfigError if a negative
// equals the context.
double sgns_step(SkipGramTables& t, std::size_t center, std::size_t context,
                 std::span<const std::size_t> negatives, double lr);

/// Draws negatives from count^power restricted to one node type.
class NegativeSampler {
 public:
  // counts[type][index] = corpus occurrences of that node.
  NegativeSampler(const std::array<std::vector<double>, kNodeTypeCount>& counts, double power);

  // Nodes of `type` with nonzero probability.
  std::size_t support(NodeType type) const noexcept;

  // `count` draws, never equal to `exclude`. Throws DataError if the type
  // has fewer than count + 1 eligible nodes.
  std::vector<Index> sample(NodeType type, std::size_t count, Index exclude, Rng& rng) const;

 private:
  std::array<std::vector<double>, kNodeTypeCount> cumulative_;
  std::array<std::size_t, kNodeTypeCount> support_{};
};

std::array<std::vector<double>, kNodeTypeCount> occurrence_counts(const hetgraph::WalkCorpus& corpus);

struct TrainResult {
  SkipGramTables tables;
  std::vector<double> epoch_loss;  // mean loss per epoch
  std::size_t pairs = 0;
};

// Reference single-threaded trainer; deterministic for a fixed seed.
TrainResult train_skipgram(const hetgraph::WalkCorpus& corpus, const SgnsConfig& config);

double cosine(std::span<const double> a, std::span<const double> b);

}  // namespace catrec::skipgram
