#pragma once

// Transaction log parsing, temporal split, engagement filters and dense ID
// assignment.

#include <filesystem>
#include <optional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "catrec/common.hpp"

namespace catrec::ingest {

struct TransactionRecord {
  std::string user_id;
  std::string basket_id;
  std::string category_id;
  Timestamp timestamp = 0;

  friend bool operator==(const TransactionRecord&, const TransactionRecord&) = default;
};

/// Records sorted ascending by timestamp, ties ordered by (user, basket,
/// category). Identical rows are kept: repeat purchases are signal.
struct TransactionLog {
  std::vector<TransactionRecord> records;

  bool empty() const noexcept { return records.empty(); }
  std::size_t size() const noexcept { return records.size(); }
  Timestamp min_time() const;
  Timestamp max_time() const;
  bool is_sorted() const noexcept;

  friend bool operator==(const TransactionLog&, const TransactionLog&) = default;
};

// Restores the sortedness invariant. The order is total, so any permutation
// of the same rows sorts to the same log.
void sort_log(TransactionLog& log);

/// Maps logical columns to header names in the input file.
struct ColumnSpec {
  std::string user_column = "user_id";
  std::string basket_column = "basket_id";
  std::string category_column = "category_id";
  std::string time_column = "epoch_seconds";
  char delimiter = ',';
};

struct ParseResult {
  TransactionLog log;
  std::size_t malformed_rows = 0;
};

// Errors: MissingArtifact (no file), DataError (missing column, no valid rows).
ParseResult parse_transactions(const std::filesystem::path& path, const ColumnSpec& spec = {});
ParseResult parse_transactions_text(std::string_view text, const ColumnSpec& spec = {});

// Writes the log back in the canonical column layout of `spec`.
std::string format_transactions(const TransactionLog& log, const ColumnSpec& spec = {});
void write_transactions(const std::filesystem::path& path, const TransactionLog& log,
                        const ColumnSpec& spec = {});

struct Split {
  TransactionLog train;
  TransactionLog test;
};

// train: ts < boundary; test: ts >= boundary.
Split split_by_time(const TransactionLog& log, Timestamp boundary);

struct UserFilter {
  std::size_t min_tx = 5;
  std::size_t max_tx = 1000;
};

// Drops users whose train transaction count is outside [min_tx, max_tx]
// (inclusive) from both splits.
Split filter_users(const Split& split, const UserFilter& filter = {});

// Keeps only categories present in both splits, and test records of users
// still present in train; iterated to a fixed point.
Split filter_categories(const Split& split);

/// Bijection between external string IDs and dense indices [0, size).
class IdIndex {
 public:
  // Returns the existing index or assigns the next one.
  Index intern(const std::string& id);
  std::optional<Index> find(const std::string& id) const;
  Index at(const std::string& id) const;  // throws DataError
  const std::string& name(Index i) const { return names_.at(i); }
  std::size_t size() const noexcept { return names_.size(); }
  const std::vector<std::string>& names() const noexcept { return names_; }

  friend bool operator==(const IdIndex& a, const IdIndex& b) { return a.names_ == b.names_; }

 private:
  std::unordered_map<std::string, Index> index_;
  std::vector<std::string> names_;
};

struct IdMaps {
  IdIndex users;
  IdIndex categories;
  IdIndex baskets;

  friend bool operator==(const IdMaps&, const IdMaps&) = default;
};

// Indices assigned in first-appearance order over the (sorted) train log.
IdMaps build_id_maps(const TransactionLog& train);

// Two-column "external_id<TAB>index" text.
std::string format_id_index(const IdIndex& idx);
void write_id_index(const std::filesystem::path& path, const IdIndex& idx);
IdIndex read_id_index(const std::filesystem::path& path);

void write_id_maps(const std::filesystem::path& dir, const IdMaps& maps);
IdMaps read_id_maps(const std::filesystem::path& dir);

/// Full pipeline: split -> user filter -> category filter.
Split prepare_splits(const TransactionLog& log, Timestamp boundary, const UserFilter& filter);

}  // namespace catrec::ingest
