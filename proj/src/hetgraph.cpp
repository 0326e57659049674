#include "catrec/hetgraph.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "catrec/parallel.hpp"
#include "catrec/textio.hpp"

namespace catrec::hetgraph {

namespace {

constexpr std::size_t ti(NodeType t) { return static_cast<std::size_t>(t); }

void finalize(Adjacency& a, std::map<Index, double>& acc) {
  a.nodes.reserve(acc.size());
  double run = 0.0;
  for (const auto& [node, w] : acc) {
    a.nodes.push_back(node);
    a.weights.push_back(w);
    run += w;
    a.cumulative.push_back(run);
  }
}

}  // namespace

bool connectable(NodeType a, NodeType b) noexcept {
  const bool ub = (a == NodeType::user && b == NodeType::basket) || (a == NodeType::basket && b == NodeType::user);
  const bool bc = (a == NodeType::basket && b == NodeType::category) ||
                  (a == NodeType::category && b == NodeType::basket);
  return ub || bc;
}

HeteroGraph HeteroGraph::build(const ingest::TransactionLog& train, const ingest::IdMaps& maps) {
  if (train.empty()) throw DataError("cannot build a graph from an empty log");
  HeteroGraph g;
  g.counts_ = {maps.users.size(), maps.baskets.size(), maps.categories.size()};

  // acc[type][node][neighbor type] -> neighbor -> weight
  std::array<std::vector<std::array<std::map<Index, double>, kNodeTypeCount>>, kNodeTypeCount> acc;
  for (std::size_t t = 0; t < kNodeTypeCount; ++t) acc[t].resize(g.counts_[t]);

  for (const auto& r : train.records) {
    const auto u = maps.users.find(r.user_id);
    const auto b = maps.baskets.find(r.basket_id);
    const auto c = maps.categories.find(r.category_id);
    if (!u || !b || !c) continue;
    acc[ti(NodeType::user)][*u][ti(NodeType::basket)][*b] += 1.0;
    acc[ti(NodeType::basket)][*b][ti(NodeType::user)][*u] += 1.0;
    acc[ti(NodeType::basket)][*b][ti(NodeType::category)][*c] += 1.0;
    acc[ti(NodeType::category)][*c][ti(NodeType::basket)][*b] += 1.0;
  }

  for (std::size_t t = 0; t < kNodeTypeCount; ++t) {
    g.adj_[t].resize(g.counts_[t]);
    for (std::size_t i = 0; i < g.counts_[t]; ++i) {
      for (std::size_t nt = 0; nt < kNodeTypeCount; ++nt) {
        finalize(g.adj_[t][i][nt], acc[t][i][nt]);
        if (t < nt) g.edges_ += g.adj_[t][i][nt].nodes.size();
      }
    }
  }
  return g;
}

const Adjacency& HeteroGraph::neighbors(NodeRef n, NodeType t) const {
  const auto& nodes = adj_[ti(n.type)];
  if (n.index >= nodes.size()) throw DataError("node out of range: " + node_token(n));
  return nodes[n.index][ti(t)];
}

double HeteroGraph::edge_weight(NodeRef a, NodeRef b) const {
  const auto& adj = neighbors(a, b.type);
  const auto it = std::lower_bound(adj.nodes.begin(), adj.nodes.end(), b.index);
  if (it == adj.nodes.end() || *it != b.index) return 0.0;
  return adj.weights[static_cast<std::size_t>(it - adj.nodes.begin())];
}

MetapathSchema::MetapathSchema(std::vector<NodeType> types) : types_(std::move(types)) {
  if (types_.size() < 2) throw ConfigError("metapath schema needs at least two types");
  if (types_.front() != types_.back()) throw ConfigError("metapath schema must start and end with the same type");
  for (std::size_t i = 0; i + 1 < types_.size(); ++i) {
    if (!connectable(types_[i], types_[i + 1])) {
      throw ConfigError("metapath schema step " + type_name(types_[i]) + "-" + type_name(types_[i + 1]) +
                        " has no edges in the graph");
    }
  }
}

MetapathSchema MetapathSchema::parse(std::string_view text) {
  std::vector<NodeType> types;
  for (auto part : textio::split(text, '-')) {
    part = textio::trim(part);
    if (part.size() != 1) throw ConfigError("bad metapath schema: '" + std::string(text) + "'");
    const char c = static_cast<char>(part[0] | 0x20);  // case-insensitive
    const auto t = type_from_prefix(c);
    if (!t) throw ConfigError("bad metapath schema type '" + std::string(part) + "'");
    types.push_back(*t);
  }
  return MetapathSchema(std::move(types));
}

MetapathSchema MetapathSchema::user_basket_category() {
  return MetapathSchema({NodeType::user, NodeType::basket, NodeType::category, NodeType::basket, NodeType::user});
}

std::string MetapathSchema::to_string() const {
  std::string s;
  for (std::size_t i = 0; i < types_.size(); ++i) {
    if (i) s += '-';
    s += static_cast<char>(type_prefix(types_[i]) - 0x20);
  }
  return s;
}

std::size_t WalkCorpus::token_count() const noexcept {
  std::size_t n = 0;
  for (const auto& w : walks) n += w.nodes.size();
  return n;
}

double mutation_probability(double epsilon0, double gamma, std::size_t step) noexcept {
  return epsilon0 * std::pow(gamma, static_cast<double>(step));
}

std::optional<NodeRef> next_node(const HeteroGraph& g, NodeRef current, NodeType required, double epsilon,
                                 Rng& rng) {
  if (!connectable(current.type, required)) {
    throw ConfigError("no " + type_name(current.type) + "-" + type_name(required) + " edges exist");
  }
  if (epsilon > 0.0 && rng.uniform() < epsilon) {
    const auto count = g.node_count(required);
    if (count == 0) return std::nullopt;
    return NodeRef{required, static_cast<Index>(rng.index(count))};
  }
  const auto& adj = g.neighbors(current, required);
  if (adj.empty()) return std::nullopt;
  if (adj.nodes.size() == 1) return NodeRef{required, adj.nodes[0]};
  const double x = rng.uniform() * adj.total();
  auto it = std::upper_bound(adj.cumulative.begin(), adj.cumulative.end(), x);
  if (it == adj.cumulative.end()) --it;
  return NodeRef{required, adj.nodes[static_cast<std::size_t>(it - adj.cumulative.begin())]};
}

std::optional<Walk> generate_walk(const HeteroGraph& g, NodeRef start, const MetapathSchema& schema,
                                  std::size_t length, double epsilon0, double gamma, Rng& rng) {
  if (start.type != NodeType::user) throw ConfigError("walks must start at a User node");
  if (start.type != schema.types().front()) throw ConfigError("schema must start with the start node's type");
  if (length < schema.size()) throw ConfigError("walk length shorter than the metapath schema");
  if (epsilon0 < 0.0 || epsilon0 > 1.0) throw ConfigError("epsilon0 must lie in [0, 1]");
  if (!(gamma > 0.0 && gamma <= 1.0)) throw ConfigError("gamma must lie in (0, 1]");

  Walk w;
  w.nodes.reserve(length);
  w.nodes.push_back(start);
  for (std::size_t k = 0; k + 1 < length; ++k) {
    const double epsilon = mutation_probability(epsilon0, gamma, k);
    const auto next = next_node(g, w.nodes.back(), schema.at_position(k + 1), epsilon, rng);
    if (!next) break;
    w.nodes.push_back(*next);
  }
  if (w.nodes.size() < schema.size()) return std::nullopt;
  return w;
}

WalkCorpus generate_corpus(const HeteroGraph& g, const MetapathSchema& schema, const WalkParams& params,
                           std::uint64_t seed, std::size_t threads) {
  if (params.walks_per_node < 1) throw ConfigError("walks_per_node must be >= 1");
  const auto users = g.node_count(NodeType::user);
  const auto per = params.walks_per_node;
  std::vector<std::optional<Walk>> slots(users * per);
  parallel_for(users, threads, [&](std::size_t u) {
    for (std::size_t j = 0; j < per; ++j) {
      Rng rng(derive_seed(seed, u, j));
      slots[u * per + j] = generate_walk(g, {NodeType::user, static_cast<Index>(u)}, schema, params.length,
                                         params.epsilon0, params.gamma, rng);
    }
  });
  WalkCorpus corpus;
  corpus.seed = seed;
  for (auto& s : slots) {
    if (s) corpus.walks.push_back(std::move(*s));
  }
  return corpus;
}

bool conforms(const Walk& w, const MetapathSchema& schema) noexcept {
  for (std::size_t i = 0; i < w.nodes.size(); ++i) {
    if (w.nodes[i].type != schema.at_position(i)) return false;
  }
  return true;
}

std::string format_corpus(const WalkCorpus& corpus) {
  std::string s;
  for (const auto& w : corpus.walks) {
    for (std::size_t i = 0; i < w.nodes.size(); ++i) {
      if (i) s += ' ';
      s += node_token(w.nodes[i]);
    }
    s += '\n';
  }
  return s;
}

void write_corpus(const std::filesystem::path& path, const WalkCorpus& corpus) {
  textio::write_file(path, format_corpus(corpus));
}

WalkCorpus read_corpus(const std::filesystem::path& path) {
  WalkCorpus corpus;
  for (const auto& line : textio::read_lines(path)) {
    const auto t = textio::trim(line);
    if (t.empty()) continue;
    Walk w;
    for (auto tok : textio::split(t, ' ')) {
      if (!tok.empty()) w.nodes.push_back(parse_node_token(tok));
    }
    corpus.walks.push_back(std::move(w));
  }
  return corpus;
}

}  // namespace catrec::hetgraph
