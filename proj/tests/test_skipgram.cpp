#include <cmath>
#include <set>

#include "catrec/skipgram.hpp"
#include "catrec/textio.hpp"
#include "doctest.h"
#include "support/oracles.hpp"

using namespace catrec;
using namespace catrec::skipgram;

namespace {

const NodeRef a{NodeType::user, 0}, b{NodeType::basket, 0}, c{NodeType::category, 0};

SkipGramTables random_tables(std::size_t rows, std::size_t dim, std::uint64_t seed, double scale = 0.5) {
  std::vector<NodeRef> nodes;
  for (std::size_t i = 0; i < rows; ++i) nodes.push_back({NodeType::category, static_cast<Index>(i)});
  SkipGramTables t{EmbeddingTable(dim, nodes), EmbeddingTable(dim, nodes)};
  Rng rng(seed);
  for (double& x : t.input.data()) x = rng.uniform(-scale, scale);
  for (double& x : t.output.data()) x = rng.uniform(-scale, scale);
  return t;
}

hetgraph::WalkCorpus community_corpus(ingest::IdMaps& maps) {
  const auto log = testing::two_community_log();
  maps = ingest::build_id_maps(log);
  const auto g = hetgraph::HeteroGraph::build(log, maps);
  return hetgraph::generate_corpus(g, hetgraph::MetapathSchema::user_basket_category(), {}, 11, 1);
}

}  // namespace

TEST_CASE("context extraction") {
  const hetgraph::Walk w{{a, b, c}};
  const std::vector<ContextPair> expect = {{a, b}, {b, a}, {b, c}, {c, b}};
  CHECK(extract_contexts(w, 1) == expect);
  CHECK(extract_contexts(w, 5).size() == 6);
  CHECK(extract_contexts(hetgraph::Walk{{a}}, 2).empty());
}

TEST_CASE("exact softmax") {
  EmbeddingTable t(3, {a, b, c, {NodeType::user, 1}});
  for (double& x : t.data()) x = 0.3;
  CHECK(softmax_prob(t, b, a) == doctest::Approx(0.25).epsilon(1e-15));

  Rng rng(2);
  for (double& x : t.data()) x = rng.uniform(-1, 1);
  double total = 0;
  for (const auto n : t.nodes()) total += softmax_prob(t, n, c);
  CHECK(std::abs(total - 1.0) < 1e-12);

  // Doubling the center vector sharpens the distribution.
  double before = 0;
  for (const auto n : t.nodes()) before = std::max(before, softmax_prob(t, n, c));
  for (double& x : t.at(c)) x *= 2;
  double after = 0;
  for (const auto n : t.nodes()) after = std::max(after, softmax_prob(t, n, c));
  CHECK(after >= before);
}

TEST_CASE("loss at zero scores is 2 ln 2") {
  auto t = random_tables(3, 4, 1);
  for (double& x : t.output.data()) x = 0;
  const std::vector<std::size_t> neg = {2};
  CHECK(sgns_step(t, 0, 1, neg, 0.1) == doctest::Approx(2 * std::log(2.0)).epsilon(1e-15));
}

TEST_CASE("zero learning rate leaves the tables unchanged") {
  auto t = random_tables(5, 6, 3);
  const auto before = t.input.data();
  const std::vector<double> in(before.begin(), before.end());
  const std::vector<double> out(t.output.data().begin(), t.output.data().end());
  const std::vector<std::size_t> neg = {2, 3};
  const double loss = sgns_step(t, 0, 1, neg, 0.0);
  CHECK(loss > 0);
  CHECK(std::equal(in.begin(), in.end(), t.input.data().begin()));
  CHECK(std::equal(out.begin(), out.end(), t.output.data().begin()));
  const std::vector<std::size_t> bad = {1};
  CHECK_THROWS_AS(sgns_step(t, 0, 1, bad, 0.1), ConfigError);
}

TEST_CASE("gradient matches central differences") {
  const std::size_t dim = 5;
  const std::vector<std::size_t> neg = {2, 3, 4};
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    auto t = random_tables(6, dim, seed, 1.0);
    SgnsGradient g;
    const double loss = sgns_gradient(t, 0, 1, neg, g);
    CHECK(loss == doctest::Approx(sgns_loss(t, 0, 1, neg)).epsilon(1e-14));
    auto check = [&](std::span<double> row, const std::vector<double>& analytic) {
      for (std::size_t i = 0; i < dim; ++i) {
        const double h = 1e-5, x = row[i];
        row[i] = x + h;
        const double up = sgns_loss(t, 0, 1, neg);
        row[i] = x - h;
        const double down = sgns_loss(t, 0, 1, neg);
        row[i] = x;
        const double fd = (up - down) / (2 * h);
        CHECK(std::abs(fd - analytic[i]) <= 1e-6 * std::max(1.0, std::abs(fd)));
      }
    };
    check(t.input.row(0), g.center);
    check(t.output.row(1), g.context);
    for (std::size_t k = 0; k < neg.size(); ++k) check(t.output.row(neg[k]), g.negatives[k]);
  }
}

TEST_CASE("one step moves along the negative gradient") {
  auto t = random_tables(4, 3, 8);
  const auto before = t;
  const std::vector<std::size_t> neg = {2};
  SgnsGradient g;
  sgns_gradient(t, 0, 1, neg, g);
  sgns_step(t, 0, 1, neg, 0.1);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(t.input.row(0)[i] == doctest::Approx(before.input.row(0)[i] - 0.1 * g.center[i]).epsilon(1e-14));
    CHECK(t.output.row(1)[i] == doctest::Approx(before.output.row(1)[i] - 0.1 * g.context[i]).epsilon(1e-14));
    CHECK(t.output.row(2)[i] == doctest::Approx(before.output.row(2)[i] - 0.1 * g.negatives[0][i]).epsilon(1e-14));
  }
}

TEST_CASE("negative sampler follows count^power") {
  std::array<std::vector<double>, kNodeTypeCount> counts;
  counts[2] = {1.0, 16.0};
  const NegativeSampler s(counts, 0.75);
  CHECK(s.support(NodeType::category) == 2);
  Rng rng(1);
  const int n = 100000;
  int heavy = 0;
  for (int i = 0; i < n; ++i) heavy += s.sample(NodeType::category, 1, 99, rng)[0] == 1;
  const double p = 8.0 / 9.0, sd = std::sqrt(n * p * (1 - p));
  CHECK(std::abs(heavy - n * p) < 3 * sd);

  // count = support - 1 is the largest admissible request.
  const auto one = s.sample(NodeType::category, 1, 1, rng);
  CHECK(one == std::vector<Index>{0});
  CHECK_THROWS_AS(s.sample(NodeType::category, 2, 0, rng), DataError);
  CHECK_THROWS_AS(s.sample(NodeType::user, 1, 0, rng), DataError);
}

TEST_CASE("negative sampler is uniform for equal counts") {
  std::array<std::vector<double>, kNodeTypeCount> counts;
  counts[1].assign(5, 3.0);
  const NegativeSampler s(counts, 0.75);
  Rng rng(4);
  std::vector<int> hits(5, 0);
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    for (auto x : s.sample(NodeType::basket, 2, 0, rng)) {
      CHECK(x != 0);
      ++hits[x];
    }
  }
  CHECK(hits[0] == 0);
  const double p = 0.25, m = 2.0 * n, sd = std::sqrt(m * p * (1 - p));
  for (int i = 1; i < 5; ++i) CHECK(std::abs(hits[i] - m * p) < 3 * sd);
}

TEST_CASE("zero epochs return the seeded initialization") {
  ingest::IdMaps maps;
  const auto corpus = community_corpus(maps);
  SgnsConfig cfg;
  cfg.epochs = 0;
  cfg.dim = 8;
  const auto r = train_skipgram(corpus, cfg);
  CHECK(r.epoch_loss.empty());
  CHECK(r.pairs > 0);
  for (double x : r.tables.input.data()) CHECK(std::abs(x) <= 0.5 / 8);
  for (double x : r.tables.output.data()) CHECK(x == 0.0);
  CHECK(r.tables.input == train_skipgram(corpus, cfg).tables.input);
  cfg.seed = 2;
  CHECK_FALSE(r.tables.input == train_skipgram(corpus, cfg).tables.input);
}

TEST_CASE("training is deterministic and reduces the loss") {
  ingest::IdMaps maps;
  const auto corpus = community_corpus(maps);
  SgnsConfig cfg;
  cfg.dim = 16;
  cfg.epochs = 3;
  const auto r1 = train_skipgram(corpus, cfg);
  const auto r2 = train_skipgram(corpus, cfg);
  CHECK(textio::format_embeddings(r1.tables.input) == textio::format_embeddings(r2.tables.input));
  REQUIRE(r1.epoch_loss.size() == 3);
  CHECK(r1.epoch_loss.back() < r1.epoch_loss.front());
  std::set<NodeRef> distinct;
  for (const auto& w : corpus.walks) distinct.insert(w.nodes.begin(), w.nodes.end());
  CHECK(r1.tables.input.size() == distinct.size());
}

TEST_CASE("communities separate in embedding space") {
  ingest::IdMaps maps;
  const auto corpus = community_corpus(maps);
  const auto r = train_skipgram(corpus, SgnsConfig{});
  CHECK(testing::community_gap(r.tables.input, maps) >= 0.2);
}

TEST_CASE("invalid configurations") {
  SgnsConfig cfg;
  cfg.dim = 0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = {};
  cfg.lr_end = 0.1;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  CHECK_THROWS_AS(train_skipgram({}, SgnsConfig{}), DataError);
}

TEST_CASE("cosine") {
  const std::vector<double> x = {1, 0}, y = {0, 2}, z = {3, 0}, zero = {0, 0};
  CHECK(cosine(x, y) == 0.0);
  CHECK(cosine(x, z) == doctest::Approx(1.0));
  CHECK(cosine(x, zero) == 0.0);
}
