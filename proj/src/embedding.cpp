#include "catrec/embedding.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace catrec {

char type_prefix(NodeType t) noexcept {
  switch (t) {
    case NodeType::user: return 'u';
    case NodeType::basket: return 'b';
    case NodeType::category: return 'c';
  }
  return '?';
}

std::optional<NodeType> type_from_prefix(char c) noexcept {
  switch (c) {
    case 'u': return NodeType::user;
    case 'b': return NodeType::basket;
    case 'c': return NodeType::category;
    default: return std::nullopt;
  }
}

std::string type_name(NodeType t) {
  switch (t) {
    case NodeType::user: return "User";
    case NodeType::basket: return "Basket";
    case NodeType::category: return "Category";
  }
  return "?";
}

std::string node_token(NodeRef n) { return type_prefix(n.type) + std::to_string(n.index); }

NodeRef parse_node_token(std::string_view token) {
  if (token.size() < 2) throw DataError("bad node token: '" + std::string(token) + "'");
  const auto type = type_from_prefix(token[0]);
  if (!type) throw DataError("bad node type prefix in token: '" + std::string(token) + "'");
  Index idx = 0;
  for (char ch : token.substr(1)) {
    if (ch < '0' || ch > '9') throw DataError("bad node index in token: '" + std::string(token) + "'");
    idx = idx * 10 + static_cast<Index>(ch - '0');
  }
  return {*type, idx};
}

EmbeddingTable::EmbeddingTable(std::size_t dim, std::vector<NodeRef> nodes)
    : dim_(dim), nodes_(std::move(nodes)), data_(dim_ * nodes_.size(), 0.0) {
  for (std::size_t r = 0; r < nodes_.size(); ++r) {
    auto& slot = lookup_[static_cast<std::size_t>(nodes_[r].type)];
    const auto idx = nodes_[r].index;
    if (slot.size() <= idx) slot.resize(idx + 1, -1);
    if (slot[idx] >= 0) throw DataError("duplicate node in embedding table: " + node_token(nodes_[r]));
    slot[idx] = static_cast<std::int64_t>(r);
  }
}

std::optional<std::size_t> EmbeddingTable::find(NodeRef n) const noexcept {
  const auto& slot = lookup_[static_cast<std::size_t>(n.type)];
  if (n.index >= slot.size() || slot[n.index] < 0) return std::nullopt;
  return static_cast<std::size_t>(slot[n.index]);
}

std::span<const double> EmbeddingTable::at(NodeRef n) const {
  const auto r = find(n);
  if (!r) throw DataError("node not in embedding table: " + node_token(n));
  return row(*r);
}

std::span<double> EmbeddingTable::at(NodeRef n) {
  const auto r = find(n);
  if (!r) throw DataError("node not in embedding table: " + node_token(n));
  return row(*r);
}

bool EmbeddingTable::all_finite() const noexcept {
  return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

}  // namespace catrec
