#include <set>

#include "catrec/affinity.hpp"
#include "catrec/baselines.hpp"
#include "catrec/evalkit.hpp"
#include "catrec/ranking.hpp"
#include "catrec/synth.hpp"
#include "doctest.h"

using namespace catrec;
using namespace catrec::synth;

namespace {

Index suffix(const std::string& id, std::size_t prefix) { return static_cast<Index>(std::stoul(id.substr(prefix))); }

}  // namespace

TEST_CASE("block assignment and split time") {
  SynthConfig c;
  c.users = 10;
  c.categories = 8;
  c.blocks = 4;
  CHECK(user_block(c, 0) == 0);
  CHECK(user_block(c, 5) == 1);
  CHECK(category_block(c, 0) == 0);
  CHECK(category_block(c, 1) == 0);
  CHECK(category_block(c, 2) == 1);
  CHECK(category_block(c, 7) == 3);
  CHECK(split_time(c) == c.start_time + 150 * kSecondsPerDay);
}

TEST_CASE("generation is deterministic and seed sensitive") {
  SynthConfig c;
  c.users = 30;
  c.categories = 12;
  c.blocks = 3;
  const auto a = generate_synthetic(c);
  CHECK(a == generate_synthetic(c));
  CHECK(a.rfind("user_id,basket_id,category_id,epoch_seconds\n", 0) == 0);
  c.seed = 2;
  CHECK(a != generate_synthetic(c));
}

TEST_CASE("noise-free logs stay inside each user's block") {
  SynthConfig c;
  c.users = 40;
  c.categories = 16;
  c.blocks = 4;
  c.noise = 0.0;
  const auto parsed = ingest::parse_transactions_text(generate_synthetic(c));
  CHECK(parsed.malformed_rows == 0);
  std::set<std::string> users;
  bool any_test = false;
  for (const auto& r : parsed.log.records) {
    CHECK(user_block(c, suffix(r.user_id, 1)) == category_block(c, suffix(r.category_id, 3)));
    CHECK(r.timestamp >= c.start_time);
    CHECK(r.timestamp < split_time(c) + static_cast<Timestamp>(c.test_days) * kSecondsPerDay);
    any_test = any_test || r.timestamp >= split_time(c);
    users.insert(r.user_id);
  }
  CHECK(users.size() == 40);
  CHECK(any_test);
}

TEST_CASE("invalid configurations") {
  SynthConfig c;
  c.blocks = 1;
  CHECK_THROWS_AS(generate_synthetic(c), ConfigError);
  c = {};
  c.noise = 1.5;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = {};
  c.categories = 3;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = {};
  c.train_days = 5;
  CHECK_THROWS_AS(c.validate(), ConfigError);
}

TEST_CASE("matrix factorization recovers the blocks of a noiseless log") {
  SynthConfig c;
  c.users = 80;
  c.categories = 20;
  c.blocks = 4;
  c.noise = 0.0;
  const auto log = ingest::parse_transactions_text(generate_synthetic(c)).log;
  const auto split = ingest::split_by_time(log, split_time(c));
  const auto maps = ingest::build_id_maps(split.train);
  const auto mats = affinity::build_matrices(split.train, maps, 30.0 * kSecondsPerDay, split_time(c));
  baselines::AlsConfig cfg;
  cfg.factors = 8;
  const auto model = baselines::als_fit(mats.transactions, cfg).model;

  eval::GroundTruth truth;
  truth.per_user.resize(maps.users.size());
  for (Index p = 0; p < maps.users.size(); ++p) {
    const auto block = user_block(c, suffix(maps.users.name(p), 1));
    for (Index q = 0; q < maps.categories.size(); ++q) {
      if (category_block(c, suffix(maps.categories.name(q), 3)) == block) truth.per_user[p].push_back(q);
    }
  }
  const auto r = eval::evaluate([&](Index p) { return top_k(model.scores(p), 5); }, truth, {5}, maps.categories.size());
  MESSAGE("own-block NDCG@5 " << r.mean(eval::Metric::ndcg, 5));
  CHECK(r.mean(eval::Metric::ndcg, 5) > 0.9);
}
