#include "catrec/project.hpp"

#include <Eigen/Core>
#include <Eigen/Eigenvalues>
#include <cmath>

#include "catrec/textio.hpp"

namespace catrec::project {

Projection project2d(const EmbeddingTable& table, const std::vector<NodeRef>& nodes,
                     const std::vector<std::string>& labels) {
  if (nodes.size() < 3) throw ConfigError("projection needs at least 3 nodes");
  if (!labels.empty() && labels.size() != nodes.size()) throw ConfigError("one label per node expected");
  const auto rows = static_cast<Eigen::Index>(nodes.size());
  const auto d = static_cast<Eigen::Index>(table.dim());

  Eigen::MatrixXd x(rows, d);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const auto v = table.at(nodes[static_cast<std::size_t>(i)]);
    for (Eigen::Index j = 0; j < d; ++j) x(i, j) = v[static_cast<std::size_t>(j)];
    const double norm = x.row(i).norm();
    if (norm > 0.0) x.row(i) /= norm;
  }
  x.rowwise() -= x.colwise().mean();

  const Eigen::MatrixXd cov = x.transpose() * x / static_cast<double>(rows);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
  if (eig.info() != Eigen::Success) throw DataError("eigen decomposition failed");

  Projection out;
  Eigen::MatrixXd comps(d, 2);
  for (int c = 0; c < 2; ++c) {
    // Eigenvalues ascend; take the two largest.
    const Eigen::Index col = d - 1 - c;
    if (col < 0) {
      comps.col(c).setZero();
      continue;
    }
    Eigen::VectorXd v = eig.eigenvectors().col(col);
    Eigen::Index arg = 0;
    v.cwiseAbs().maxCoeff(&arg);
    if (v(arg) < 0.0) v = -v;
    comps.col(c) = v;
    out.variance[c] = std::max(0.0, eig.eigenvalues()(col));
  }
  const Eigen::MatrixXd proj = x * comps;
  for (Eigen::Index i = 0; i < rows; ++i) {
    const auto k = static_cast<std::size_t>(i);
    out.points.push_back({nodes[k], proj(i, 0), proj(i, 1), labels.empty() ? type_name(nodes[k].type) : labels[k]});
  }
  return out;
}

std::string format_projection_csv(const Projection& p) {
  std::string s = "node,x,y,label\n";
  for (const auto& pt : p.points) {
    s += node_token(pt.node) + "," + textio::format_double(pt.x) + "," + textio::format_double(pt.y) + "," +
         pt.label + "\n";
  }
  return s;
}

}  // namespace catrec::project
