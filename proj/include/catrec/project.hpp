#pragma once

// Two-dimensional PCA projection of selected embedding rows, for plotting.

#include <string>
#include <vector>

#include "catrec/embedding.hpp"

namespace catrec::project {

struct ProjectedPoint {
  NodeRef node;
  double x = 0.0;
  double y = 0.0;
  std::string label;
};

struct Projection {
  std::vector<ProjectedPoint> points;
  double variance[2] = {0.0, 0.0};  // along each component
};

/// Rows are L2-normalized, mean-centered, then projected on the top two
/// principal components. Component signs are fixed so the largest-magnitude
/// loading is positive. Throws ConfigError for fewer than 3 nodes and
/// DataError for nodes missing from the table.
Projection project2d(const EmbeddingTable& table, const std::vector<NodeRef>& nodes,
                     const std::vector<std::string>& labels = {});

// "node,x,y,label" header plus one line per point.
std::string format_projection_csv(const Projection& p);

}  // namespace catrec::project
