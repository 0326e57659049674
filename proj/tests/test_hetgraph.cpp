#include <cmath>
#include <filesystem>
#include <set>

#include "catrec/hetgraph.hpp"
#include "catrec/synth.hpp"
#include "doctest.h"

using namespace catrec;
using namespace catrec::hetgraph;

namespace {

struct Built {
  ingest::TransactionLog log;
  ingest::IdMaps maps;
  HeteroGraph g;
};

Built build(std::vector<ingest::TransactionRecord> recs) {
  Built b;
  b.log.records = std::move(recs);
  ingest::sort_log(b.log);
  b.maps = ingest::build_id_maps(b.log);
  b.g = HeteroGraph::build(b.log, b.maps);
  return b;
}

Built synthetic(std::size_t users, std::size_t categories) {
  synth::SynthConfig c;
  c.users = users;
  c.categories = categories;
  c.train_days = 60;
  c.test_days = 10;
  auto parsed = ingest::parse_transactions_text(synth::generate_synthetic(c));
  Built b;
  b.log = std::move(parsed.log);
  b.maps = ingest::build_id_maps(b.log);
  b.g = HeteroGraph::build(b.log, b.maps);
  return b;
}

NodeRef user(const Built& b, const char* id) { return {NodeType::user, b.maps.users.at(id)}; }
NodeRef basket(const Built& b, const char* id) { return {NodeType::basket, b.maps.baskets.at(id)}; }
NodeRef category(const Built& b, const char* id) { return {NodeType::category, b.maps.categories.at(id)}; }

}  // namespace

TEST_CASE("graph from a single record") {
  const auto b = build({{"u", "b", "c", 5}});
  CHECK(b.g.node_count() == 3);
  CHECK(b.g.edge_count() == 2);
  CHECK(b.g.edge_weight(user(b, "u"), basket(b, "b")) == 1.0);
  CHECK(b.g.edge_weight(basket(b, "b"), category(b, "c")) == 1.0);
  CHECK(b.g.edge_weight(user(b, "u"), category(b, "c")) == 0.0);
  CHECK_THROWS_AS(HeteroGraph::build({}, {}), DataError);
}

TEST_CASE("edge weights count multiplicity and shared baskets merge") {
  const auto b = build({{"u", "b", "c1", 5}, {"u", "b", "c2", 6}, {"v", "b", "c1", 7}});
  CHECK(b.g.node_count(NodeType::basket) == 1);
  CHECK(b.g.edge_weight(user(b, "u"), basket(b, "b")) == 2.0);
  CHECK(b.g.edge_weight(basket(b, "b"), user(b, "u")) == 2.0);
  CHECK(b.g.edge_weight(user(b, "v"), basket(b, "b")) == 1.0);
  CHECK(b.g.edge_weight(basket(b, "b"), category(b, "c1")) == 2.0);
  CHECK(b.g.neighbors(basket(b, "b"), NodeType::user).nodes.size() == 2);
  CHECK(b.g.neighbors(user(b, "u"), NodeType::category).empty());
}

TEST_CASE("schema parsing") {
  const auto s = MetapathSchema::parse("U-B-C-B-U");
  CHECK(s.to_string() == "U-B-C-B-U");
  CHECK(s.size() == 5);
  CHECK(s.period() == 4);
  CHECK(s.types() == MetapathSchema::user_basket_category().types());
  CHECK_THROWS_AS(MetapathSchema::parse("U-B-C"), ConfigError);
  CHECK_THROWS_AS(MetapathSchema::parse("U-C-U"), ConfigError);
  CHECK_THROWS_AS(MetapathSchema::parse("U-X-U"), ConfigError);
  CHECK_THROWS_AS(MetapathSchema::parse("U"), ConfigError);
}

TEST_CASE("mutation probability decays geometrically") {
  CHECK(mutation_probability(0.8, 0.5, 3) == doctest::Approx(0.1).epsilon(1e-15));
  CHECK(mutation_probability(0.8, 0.5, 0) == 0.8);
  CHECK(mutation_probability(0.3, 1.0, 50) == 0.3);
}

TEST_CASE("walk of length 9 follows the cyclic schema") {
  const auto b = synthetic(20, 8);
  const auto s = MetapathSchema::user_basket_category();
  Rng rng(3);
  const auto w = generate_walk(b.g, {NodeType::user, 0}, s, 9, 0.1, 0.99, rng);
  REQUIRE(w);
  REQUIRE(w->nodes.size() == 9);
  const std::vector<NodeType> expect = {NodeType::user, NodeType::basket, NodeType::category,
                                        NodeType::basket, NodeType::user, NodeType::basket,
                                        NodeType::category, NodeType::basket, NodeType::user};
  for (std::size_t i = 0; i < 9; ++i) CHECK(w->nodes[i].type == expect[i]);
  CHECK(conforms(*w, s));
}

TEST_CASE("walk preconditions") {
  const auto b = synthetic(10, 6);
  const auto s = MetapathSchema::user_basket_category();
  Rng rng(1);
  CHECK_THROWS_AS(generate_walk(b.g, {NodeType::basket, 0}, s, 9, 0.1, 0.9, rng), ConfigError);
  CHECK_THROWS_AS(generate_walk(b.g, {NodeType::user, 0}, s, 4, 0.1, 0.9, rng), ConfigError);
  CHECK_THROWS_AS(generate_walk(b.g, {NodeType::user, 0}, s, 9, 1.5, 0.9, rng), ConfigError);
  CHECK_THROWS_AS(generate_walk(b.g, {NodeType::user, 0}, s, 9, 0.1, 0.0, rng), ConfigError);
}

TEST_CASE("pure exploit follows edges") {
  const auto b = synthetic(30, 10);
  const auto s = MetapathSchema::user_basket_category();
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    Rng rng(seed);
    const auto w = generate_walk(b.g, {NodeType::user, static_cast<Index>(seed % 30)}, s, 21, 0.0, 1.0, rng);
    REQUIRE(w);
    CHECK(conforms(*w, s));
    for (std::size_t i = 0; i + 1 < w->nodes.size(); ++i) CHECK(b.g.edge_weight(w->nodes[i], w->nodes[i + 1]) > 0.0);
  }
}

TEST_CASE("exploit step with a single neighbor is deterministic") {
  const auto b = build({{"u", "b", "c", 5}});
  Rng rng(9);
  for (int i = 0; i < 20; ++i) CHECK(next_node(b.g, user(b, "u"), NodeType::basket, 0.0, rng) == basket(b, "b"));
  // Path graph: the whole walk is forced.
  const auto w = generate_walk(b.g, user(b, "u"), MetapathSchema::user_basket_category(), 9, 0.0, 1.0, rng);
  REQUIRE(w);
  for (std::size_t i = 0; i < 9; ++i) {
    const auto t = w->nodes[i].type;
    CHECK(w->nodes[i] == (t == NodeType::user ? user(b, "u") : t == NodeType::basket ? basket(b, "b") : category(b, "c")));
  }
}

TEST_CASE("exploit picks neighbors in proportion to weight") {
  const auto b = build({{"u", "b0", "c0", 1}, {"u", "b1", "c0", 2}, {"u", "b1", "c1", 3}, {"u", "b1", "c2", 4}});
  REQUIRE(b.g.edge_weight(user(b, "u"), basket(b, "b1")) == 3.0);
  Rng rng(17);
  const int n = 100000;
  int heavy = 0;
  for (int i = 0; i < n; ++i) heavy += next_node(b.g, user(b, "u"), NodeType::basket, 0.0, rng) == basket(b, "b1");
  const double p = 0.75, sd = std::sqrt(n * p * (1 - p));
  CHECK(std::abs(heavy - n * p) < 3 * sd);
}

TEST_CASE("pure explore is uniform over the required type") {
  const auto b = synthetic(20, 8);
  const auto nc = b.g.node_count(NodeType::category);
  Rng rng(5);
  std::vector<int> hits(nc, 0);
  const int n = 100000;
  NodeRef start{NodeType::basket, 0};
  for (int i = 0; i < n; ++i) {
    const auto x = next_node(b.g, start, NodeType::category, 1.0, rng);
    REQUIRE(x);
    ++hits[x->index];
  }
  const double p = 1.0 / static_cast<double>(nc), sd = std::sqrt(n * p * (1 - p));
  for (auto h : hits) CHECK(std::abs(h - n * p) < 4 * sd);
}

TEST_CASE("transition to a non-adjacent type is rejected") {
  const auto b = build({{"u", "b", "c", 5}});
  Rng rng(1);
  CHECK_FALSE(next_node(b.g, user(b, "u"), NodeType::basket, 0.0, rng) == std::nullopt);
  CHECK_THROWS_AS(next_node(b.g, user(b, "u"), NodeType::category, 0.0, rng), ConfigError);
}

TEST_CASE("corpus is deterministic across thread counts and sensitive to the seed") {
  const auto b = synthetic(25, 10);
  const auto s = MetapathSchema::user_basket_category();
  WalkParams p;
  p.walks_per_node = 5;
  p.length = 13;
  const auto one = generate_corpus(b.g, s, p, 42, 1);
  const auto four = generate_corpus(b.g, s, p, 42, 4);
  CHECK(one == four);
  CHECK(format_corpus(one) == format_corpus(four));
  CHECK(one.walks.size() <= 25 * 5);
  CHECK(one == generate_corpus(b.g, s, p, 42, 1));
  const auto other = generate_corpus(b.g, s, p, 43, 1);
  CHECK(format_corpus(one) != format_corpus(other));
  for (const auto& w : one.walks) CHECK(conforms(w, s));
  CHECK(one.token_count() == one.walks.size() * 13);
  p.walks_per_node = 0;
  CHECK_THROWS_AS(generate_corpus(b.g, s, p, 42, 1), ConfigError);
}

TEST_CASE("corpus file round trip") {
  const auto b = synthetic(10, 6);
  WalkParams p;
  p.walks_per_node = 2;
  p.length = 9;
  const auto c = generate_corpus(b.g, MetapathSchema::user_basket_category(), p, 7, 1);
  const auto path = std::filesystem::temp_directory_path() / "catrec_test_corpus.txt";
  write_corpus(path, c);
  auto back = read_corpus(path);
  back.seed = c.seed;
  CHECK(back == c);
  std::filesystem::remove(path);
}
