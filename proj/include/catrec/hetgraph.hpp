#pragma once

// Typed User/Basket/Category interaction graph and metapath-constrained
// random walks with an explore/exploit transition rule.

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "catrec/embedding.hpp"
#include "catrec/ingest.hpp"
#include "catrec/rng.hpp"

namespace catrec::hetgraph {

struct Adjacency {
  std::vector<Index> nodes;
  std::vector<double> weights;
  std::vector<double> cumulative;  // running sum of weights

  bool empty() const noexcept { return nodes.empty(); }
  double total() const noexcept { return cumulative.empty() ? 0.0 : cumulative.back(); }
};

/// Undirected weighted graph. Edges exist only between User-Basket and
/// Basket-Category; weights are co-occurrence counts (>= 1).
class HeteroGraph {
 public:
  static HeteroGraph build(const ingest::TransactionLog& train, const ingest::IdMaps& maps);

  std::size_t node_count(NodeType t) const noexcept { return counts_[static_cast<std::size_t>(t)]; }
  std::size_t node_count() const noexcept { return counts_[0] + counts_[1] + counts_[2]; }
  std::size_t edge_count() const noexcept { return edges_; }

  // Neighbors of `n` that have type `t`, sorted by index.
  const Adjacency& neighbors(NodeRef n, NodeType t) const;

  // 0 if not adjacent.
  double edge_weight(NodeRef a, NodeRef b) const;

 private:
  std::array<std::size_t, kNodeTypeCount> counts_{};
  std::size_t edges_ = 0;
  std::array<std::vector<std::array<Adjacency, kNodeTypeCount>>, kNodeTypeCount> adj_;
};

bool connectable(NodeType a, NodeType b) noexcept;

/// Cyclic node-type sequence; first == last.
class MetapathSchema {
 public:
  explicit MetapathSchema(std::vector<NodeType> types);
  // "U-B-C-B-U"
  static MetapathSchema parse(std::string_view text);
  static MetapathSchema user_basket_category();

  std::size_t size() const noexcept { return types_.size(); }
  std::size_t period() const noexcept { return types_.size() - 1; }
  // Type expected at walk position i.
  NodeType at_position(std::size_t i) const noexcept { return types_[i % period()]; }
  const std::vector<NodeType>& types() const noexcept { return types_; }
  std::string to_string() const;

 private:
  std::vector<NodeType> types_;
};

struct Walk {
  std::vector<NodeRef> nodes;
  friend bool operator==(const Walk&, const Walk&) = default;
};

struct WalkCorpus {
  std::vector<Walk> walks;
  std::uint64_t seed = 0;

  std::size_t token_count() const noexcept;
  friend bool operator==(const WalkCorpus&, const WalkCorpus&) = default;
};

struct WalkParams {
  std::size_t walks_per_node = 10;
  std::size_t length = 21;  // nodes per walk
  double epsilon0 = 0.1;
  double gamma = 0.99;
};

// Mutation probability used at transition k (k = 0 for the first step).
double mutation_probability(double epsilon0, double gamma, std::size_t step) noexcept;

/// With probability epsilon: a uniformly random node of `required` from the
/// whole graph. Otherwise: a neighbor of `required` type sampled
/// proportionally to edge weight. nullopt signals a dead end (exploit step
/// with no eligible neighbor).
std::optional<NodeRef> next_node(const HeteroGraph& g, NodeRef current, NodeType required, double epsilon,
                                 Rng& rng);

// nullopt when a dead end cut the walk below one schema length.
std::optional<Walk> generate_walk(const HeteroGraph& g, NodeRef start, const MetapathSchema& schema,
                                  std::size_t length, double epsilon0, double gamma, Rng& rng);

// walks_per_node walks from every User node; walk j from user u uses the
// sub-seed derive_seed(seed, u, j). Output is node-major and identical for
// any thread count.
WalkCorpus generate_corpus(const HeteroGraph& g, const MetapathSchema& schema, const WalkParams& params,
                           std::uint64_t seed, std::size_t threads = 1);

bool conforms(const Walk& w, const MetapathSchema& schema) noexcept;

// One walk per line, space-separated tokens ("u12 b3 c7 ...").
std::string format_corpus(const WalkCorpus& corpus);
void write_corpus(const std::filesystem::path& path, const WalkCorpus& corpus);
WalkCorpus read_corpus(const std::filesystem::path& path);

}  // namespace catrec::hetgraph
