#include "catrec/sparse.hpp"

#include <algorithm>

namespace catrec {

SparseMatrix SparseMatrix::from_triplets(std::size_t rows, std::size_t cols, std::vector<Triplet> entries) {
  std::stable_sort(entries.begin(), entries.end(), [](const Triplet& a, const Triplet& b) {
    return a.row != b.row ? a.row < b.row : a.col < b.col;
  });
  SparseMatrix m(rows, cols);
  for (std::size_t i = 0; i < entries.size();) {
    const auto& e = entries[i];
    if (e.row >= rows || e.col >= cols) throw DataError("sparse entry out of range");
    double v = 0.0;
    std::size_t j = i;
    for (; j < entries.size() && entries[j].row == e.row && entries[j].col == e.col; ++j) v += entries[j].value;
    m.col_idx_.push_back(e.col);
    m.values_.push_back(v);
    ++m.row_ptr_[e.row + 1];
    i = j;
  }
  for (std::size_t r = 0; r < rows; ++r) m.row_ptr_[r + 1] += m.row_ptr_[r];
  return m;
}

std::optional<std::size_t> SparseMatrix::position(Index r, Index c) const {
  if (r >= rows_) return std::nullopt;
  const auto first = col_idx_.begin() + static_cast<std::ptrdiff_t>(row_ptr_[r]);
  const auto last = col_idx_.begin() + static_cast<std::ptrdiff_t>(row_ptr_[r + 1]);
  const auto it = std::lower_bound(first, last, c);
  if (it == last || *it != c) return std::nullopt;
  return static_cast<std::size_t>(it - col_idx_.begin());
}

double SparseMatrix::get(Index r, Index c) const {
  const auto p = position(r, c);
  return p ? values_[*p] : 0.0;
}

std::vector<Triplet> SparseMatrix::triplets() const {
  std::vector<Triplet> out;
  out.reserve(nnz());
  for (std::size_t r = 0; r < rows_; ++r) {
    for (std::size_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) {
      out.push_back({static_cast<Index>(r), col_idx_[k], values_[k]});
    }
  }
  return out;
}

bool SparseMatrix::same_support(const SparseMatrix& other) const noexcept {
  return rows_ == other.rows_ && cols_ == other.cols_ && row_ptr_ == other.row_ptr_ &&
         col_idx_ == other.col_idx_;
}

}  // namespace catrec
