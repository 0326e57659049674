#pragma once

// Block-structured synthetic purchase logs. Users and categories are split
// into affinity blocks; each user keeps a handful of periodic purchase
// habits, mostly inside their own block. Habits start, stop or emerge over
// time so recency carries information the binary purchase matrix lacks.

#include <cstdint>
#include <string>

#include "catrec/common.hpp"

namespace catrec::synth {

struct SynthConfig {
  std::size_t users = 200;
  std::size_t categories = 40;
  std::size_t blocks = 4;
  double noise = 0.1;  // chance a habit or one-off lands outside the user's block
  std::uint64_t seed = 1;
  std::size_t train_days = 150;
  std::size_t test_days = 30;
  Timestamp start_time = 1'599'955'200;  // midnight UTC

  void validate() const;
};

// Users are assigned round-robin; categories in contiguous runs.
std::size_t user_block(const SynthConfig& c, Index user) noexcept;
std::size_t category_block(const SynthConfig& c, Index category) noexcept;

// First second of the test window.
Timestamp split_time(const SynthConfig& c) noexcept;

// CSV with header user_id,basket_id,category_id,epoch_seconds; rows sorted
// by (timestamp, user, basket, category). IDs are u<i>, b<i>_<day>, cat<j>.
std::string generate_synthetic(const SynthConfig& c);

}  // namespace catrec::synth
