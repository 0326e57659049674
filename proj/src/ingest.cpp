#include "catrec/ingest.hpp"

#include <algorithm>
#include <fstream>
#include <tuple>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "catrec/textio.hpp"

namespace catrec::ingest {

Timestamp TransactionLog::min_time() const {
  if (records.empty()) throw DataError("empty transaction log");
  return records.front().timestamp;
}

Timestamp TransactionLog::max_time() const {
  if (records.empty()) throw DataError("empty transaction log");
  return records.back().timestamp;
}

bool TransactionLog::is_sorted() const noexcept {
  return std::is_sorted(records.begin(), records.end(),
                        [](const auto& a, const auto& b) { return a.timestamp < b.timestamp; });
}

void sort_log(TransactionLog& log) {
  std::sort(log.records.begin(), log.records.end(), [](const auto& a, const auto& b) {
    return std::tie(a.timestamp, a.user_id, a.basket_id, a.category_id) <
           std::tie(b.timestamp, b.user_id, b.basket_id, b.category_id);
  });
}

ParseResult parse_transactions_text(std::string_view text, const ColumnSpec& spec) {
  std::vector<std::string_view> lines;
  for (std::size_t start = 0; start < text.size();) {
    auto end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    lines.push_back(text.substr(start, end - start));
    start = end + 1;
  }
  if (lines.empty() || textio::trim(lines[0]).empty()) throw DataError("missing header row");

  const auto header = textio::split(textio::trim(lines[0]), spec.delimiter);
  auto column = [&](const std::string& name) {
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (textio::trim(header[i]) == name) return i;
    }
    throw DataError("missing required column: " + name);
  };
  const auto cu = column(spec.user_column);
  const auto cb = column(spec.basket_column);
  const auto cc = column(spec.category_column);
  const auto ct = column(spec.time_column);
  const auto needed = std::max({cu, cb, cc, ct}) + 1;

  ParseResult result;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto line = textio::trim(lines[i]);
    if (line.empty()) continue;
    const auto f = textio::split(line, spec.delimiter);
    if (f.size() < needed) {
      ++result.malformed_rows;
      continue;
    }
    TransactionRecord r;
    r.user_id = std::string(textio::trim(f[cu]));
    r.basket_id = std::string(textio::trim(f[cb]));
    r.category_id = std::string(textio::trim(f[cc]));
    try {
      r.timestamp = textio::parse_int(f[ct]);
    } catch (const DataError&) {
      ++result.malformed_rows;
      continue;
    }
    if (r.user_id.empty() || r.basket_id.empty() || r.category_id.empty() || r.timestamp <= 0) {
      ++result.malformed_rows;
      continue;
    }
    result.log.records.push_back(std::move(r));
  }
  if (result.log.empty()) throw DataError("no valid transaction rows");
  sort_log(result.log);
  return result;
}

ParseResult parse_transactions(const std::filesystem::path& path, const ColumnSpec& spec) {
  textio::require_file(path);
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_transactions_text(ss.str(), spec);
}

std::string format_transactions(const TransactionLog& log, const ColumnSpec& spec) {
  const char d = spec.delimiter;
  std::string s = spec.user_column + d + spec.basket_column + d + spec.category_column + d + spec.time_column + "\n";
  for (const auto& r : log.records) {
    s += r.user_id;
    s += d;
    s += r.basket_id;
    s += d;
    s += r.category_id;
    s += d;
    s += std::to_string(r.timestamp);
    s += '\n';
  }
  return s;
}

void write_transactions(const std::filesystem::path& path, const TransactionLog& log, const ColumnSpec& spec) {
  textio::write_file(path, format_transactions(log, spec));
}

Split split_by_time(const TransactionLog& log, Timestamp boundary) {
  Split s;
  for (const auto& r : log.records) (r.timestamp < boundary ? s.train : s.test).records.push_back(r);
  if (s.train.empty()) throw DataError("empty train split at boundary " + std::to_string(boundary));
  if (s.test.empty()) throw DataError("empty test split at boundary " + std::to_string(boundary));
  return s;
}

namespace {

template <typename Pred>
TransactionLog keep_if(const TransactionLog& log, Pred pred) {
  TransactionLog out;
  std::copy_if(log.records.begin(), log.records.end(), std::back_inserter(out.records), pred);
  return out;
}

}  // namespace

Split filter_users(const Split& split, const UserFilter& filter) {
  if (filter.min_tx < 1 || filter.max_tx <= filter.min_tx) {
    throw ConfigError("user filter requires 1 <= min_tx < max_tx");
  }
  std::unordered_map<std::string, std::size_t> counts;
  for (const auto& r : split.train.records) ++counts[r.user_id];

  auto keep = [&](const TransactionRecord& r) {
    const auto it = counts.find(r.user_id);
    return it != counts.end() && it->second >= filter.min_tx && it->second <= filter.max_tx;
  };
  Split out{keep_if(split.train, keep), keep_if(split.test, keep)};
  if (out.train.empty() || out.test.empty()) throw DataError("all users filtered out");
  return out;
}

Split filter_categories(const Split& split) {
  if (split.train.empty() || split.test.empty()) throw DataError("category filter needs two non-empty splits");
  Split cur = split;
  while (true) {
    std::unordered_set<std::string> train_cats, test_cats;
    for (const auto& r : cur.train.records) train_cats.insert(r.category_id);
    for (const auto& r : cur.test.records) test_cats.insert(r.category_id);
    auto in_both = [&](const TransactionRecord& r) {
      return train_cats.contains(r.category_id) && test_cats.contains(r.category_id);
    };
    Split next{keep_if(cur.train, in_both), keep_if(cur.test, in_both)};

    std::unordered_set<std::string> train_users;
    for (const auto& r : next.train.records) train_users.insert(r.user_id);
    next.test = keep_if(next.test, [&](const TransactionRecord& r) { return train_users.contains(r.user_id); });

    if (next.train.empty() || next.test.empty()) throw DataError("no category present in both splits");
    const bool fixed = next.train.size() == cur.train.size() && next.test.size() == cur.test.size();
    cur = std::move(next);
    if (fixed) return cur;
  }
}

Index IdIndex::intern(const std::string& id) {
  const auto [it, inserted] = index_.try_emplace(id, static_cast<Index>(names_.size()));
  if (inserted) names_.push_back(id);
  return it->second;
}

std::optional<Index> IdIndex::find(const std::string& id) const {
  const auto it = index_.find(id);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

Index IdIndex::at(const std::string& id) const {
  const auto i = find(id);
  if (!i) throw DataError("unknown id: " + id);
  return *i;
}

IdMaps build_id_maps(const TransactionLog& train) {
  if (train.empty()) throw DataError("cannot build id maps from an empty log");
  IdMaps maps;
  for (const auto& r : train.records) {
    maps.users.intern(r.user_id);
    maps.baskets.intern(r.basket_id);
    maps.categories.intern(r.category_id);
  }
  return maps;
}

std::string format_id_index(const IdIndex& idx) {
  std::string s;
  for (std::size_t i = 0; i < idx.size(); ++i) s += idx.name(static_cast<Index>(i)) + "\t" + std::to_string(i) + "\n";
  return s;
}

void write_id_index(const std::filesystem::path& path, const IdIndex& idx) {
  textio::write_file(path, format_id_index(idx));
}

IdIndex read_id_index(const std::filesystem::path& path) {
  const auto lines = textio::read_lines(path);
  IdIndex idx;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    const auto f = textio::split(lines[i], '\t');
    if (f.size() != 2) throw DataError("bad id map line " + std::to_string(i + 1) + " in " + path.string());
    const auto expect = static_cast<Index>(textio::parse_int(f[1]));
    if (idx.intern(std::string(f[0])) != expect) throw DataError("non-contiguous id map: " + path.string());
  }
  return idx;
}

void write_id_maps(const std::filesystem::path& dir, const IdMaps& maps) {
  write_id_index(dir / "users.idmap", maps.users);
  write_id_index(dir / "categories.idmap", maps.categories);
  write_id_index(dir / "baskets.idmap", maps.baskets);
}

IdMaps read_id_maps(const std::filesystem::path& dir) {
  return {read_id_index(dir / "users.idmap"), read_id_index(dir / "categories.idmap"),
          read_id_index(dir / "baskets.idmap")};
}

Split prepare_splits(const TransactionLog& log, Timestamp boundary, const UserFilter& filter) {
  return filter_categories(filter_users(split_by_time(log, boundary), filter));
}

}  // namespace catrec::ingest
