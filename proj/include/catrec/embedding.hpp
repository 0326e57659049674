#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "catrec/common.hpp"

namespace catrec {

enum class NodeType : std::uint8_t { user = 0, basket = 1, category = 2 };

constexpr std::size_t kNodeTypeCount = 3;

char type_prefix(NodeType t) noexcept;
std::optional<NodeType> type_from_prefix(char c) noexcept;
std::string type_name(NodeType t);

struct NodeRef {
  NodeType type = NodeType::user;
  Index index = 0;

  friend auto operator<=>(const NodeRef&, const NodeRef&) = default;
};

// "u12", "b3", "c40"
std::string node_token(NodeRef n);
NodeRef parse_node_token(std::string_view token);

/// Dense row-major table of d-dimensional vectors keyed by typed node.
class EmbeddingTable {
 public:
  EmbeddingTable() = default;
  EmbeddingTable(std::size_t dim, std::vector<NodeRef> nodes);

  std::size_t dim() const noexcept { return dim_; }
  std::size_t size() const noexcept { return nodes_.size(); }
  const std::vector<NodeRef>& nodes() const noexcept { return nodes_; }

  std::optional<std::size_t> find(NodeRef n) const noexcept;
  bool contains(NodeRef n) const noexcept { return find(n).has_value(); }

  std::span<double> row(std::size_t r) { return {data_.data() + r * dim_, dim_}; }
  std::span<const double> row(std::size_t r) const { return {data_.data() + r * dim_, dim_}; }

  // Throws DataError when the node is absent.
  std::span<const double> at(NodeRef n) const;
  std::span<double> at(NodeRef n);

  std::span<double> data() noexcept { return data_; }
  std::span<const double> data() const noexcept { return data_; }

  bool all_finite() const noexcept;

  friend bool operator==(const EmbeddingTable&, const EmbeddingTable&) = default;

 private:
  std::size_t dim_ = 0;
  std::vector<NodeRef> nodes_;
  std::vector<double> data_;
  std::array<std::vector<std::int64_t>, kNodeTypeCount> lookup_;
};

}  // namespace catrec
