#include "catrec/synth.hpp"

#include <algorithm>
#include <vector>

#include "catrec/ingest.hpp"
#include "catrec/rng.hpp"

namespace catrec::synth {

namespace {

struct Habit {
  Index category;
  std::int64_t period;  // days
  std::int64_t first;   // day of first purchase
  std::int64_t stop;    // no purchases on or after this day
};

Index pick_category(const SynthConfig& c, std::size_t block, Rng& rng) {
  if (c.noise > 0.0 && rng.bernoulli(c.noise)) return static_cast<Index>(rng.index(c.categories));
  std::vector<Index> in_block;
  for (Index q = 0; q < c.categories; ++q) {
    if (category_block(c, q) == block) in_block.push_back(q);
  }
  return in_block[rng.index(in_block.size())];
}

std::int64_t uniform_day(Rng& rng, std::int64_t lo, std::int64_t hi) {
  return lo + static_cast<std::int64_t>(rng.index(static_cast<std::uint64_t>(hi - lo + 1)));
}

}  // namespace

void SynthConfig::validate() const {
  if (blocks < 2) throw ConfigError("synthetic data needs at least 2 blocks");
  if (users < blocks || categories < blocks) throw ConfigError("synthetic data needs users, categories >= blocks");
  if (!(noise >= 0.0 && noise <= 1.0)) throw ConfigError("synthetic noise must lie in [0, 1]");
  if (train_days < 20 || test_days < 1) throw ConfigError("synthetic horizon too short");
}

std::size_t user_block(const SynthConfig& c, Index user) noexcept { return user % c.blocks; }

std::size_t category_block(const SynthConfig& c, Index category) noexcept {
  return static_cast<std::size_t>(category) * c.blocks / c.categories;
}

Timestamp split_time(const SynthConfig& c) noexcept {
  return c.start_time + static_cast<Timestamp>(c.train_days) * kSecondsPerDay;
}

std::string generate_synthetic(const SynthConfig& c) {
  c.validate();
  const auto train = static_cast<std::int64_t>(c.train_days);
  const auto horizon = train + static_cast<std::int64_t>(c.test_days);
  // Habit windows scale with the training horizon (defaults: 150 days).
  const auto at = [&](double frac) { return static_cast<std::int64_t>(frac * static_cast<double>(train)); };

  ingest::TransactionLog log;
  for (Index u = 0; u < c.users; ++u) {
    Rng rng(derive_seed(c.seed, u));
    const std::size_t block = user_block(c, u);
    const std::string user = "u" + std::to_string(u);
    const auto buy = [&](Index q, std::int64_t day) {
      const Timestamp ts = c.start_time + day * kSecondsPerDay + static_cast<Timestamp>(rng.index(kSecondsPerDay));
      log.records.push_back({user, "b" + std::to_string(u) + "_" + std::to_string(day), "cat" + std::to_string(q), ts});
    };

    std::size_t n_habits = std::min<std::size_t>(5 + rng.index(4), c.categories);
    if (c.noise == 0.0) {
      std::size_t own = 0;
      for (Index q = 0; q < c.categories; ++q) own += category_block(c, q) == block;
      n_habits = std::min(n_habits, own);
    }
    std::vector<Habit> habits;
    while (habits.size() < n_habits) {
      const Index q = pick_category(c, block, rng);
      if (std::any_of(habits.begin(), habits.end(), [&](const Habit& h) { return h.category == q; })) continue;
      Habit h{q, uniform_day(rng, 5, 25), 0, horizon};
      const double kind = rng.uniform();
      if (kind < 0.5) {
        h.first = uniform_day(rng, 0, at(0.4));
      } else if (kind < 0.8) {
        h.first = uniform_day(rng, 0, at(0.2));
        h.stop = uniform_day(rng, at(0.2), at(0.6));
      } else {
        h.first = uniform_day(rng, at(0.6), at(0.93));
      }
      habits.push_back(h);
    }
    for (const auto& h : habits) {
      for (std::int64_t day = h.first; day < h.stop && day < horizon;) {
        buy(h.category, day);
        day += std::max<std::int64_t>(1, h.period + uniform_day(rng, -1, 1));
      }
    }
    const std::size_t one_offs = 1 + rng.index(3);
    for (std::size_t i = 0; i < one_offs; ++i) buy(pick_category(c, block, rng), uniform_day(rng, 0, horizon - 1));
  }

  ingest::sort_log(log);
  return ingest::format_transactions(log);
}

}  // namespace catrec::synth
