#include "graphmask/tensor.hpp"

#include <algorithm>

#include "graphmask/error.hpp"

namespace graphmask {

SparseMatrix::SparseMatrix(std::size_t rows, std::size_t cols, std::vector<Entry> entries)
    : rows_(rows), cols_(cols), row_start_(rows + 1, 0) {
  std::stable_sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) {
    return a.row != b.row ? a.row < b.row : a.col < b.col;
  });
  col_index_.reserve(entries.size());
  values_.reserve(entries.size());
  for (const auto& e : entries) {
    if (e.row >= rows || e.col >= cols) throw InvalidInput("sparse entry out of range");
    ++row_start_[e.row + 1];
    col_index_.push_back(e.col);
    values_.push_back(e.value);
  }
  for (std::size_t r = 0; r < rows; ++r) row_start_[r + 1] += row_start_[r];
}

Matrix SparseMatrix::multiply(const Matrix& dense) const {
  if (static_cast<std::size_t>(dense.rows()) != cols_) throw InvalidInput("spmm shape mismatch");
  Matrix out = Matrix::Zero(static_cast<Eigen::Index>(rows_), dense.cols());
  for (std::size_t r = 0; r < rows_; ++r) {
    for (std::size_t k = row_start_[r]; k < row_start_[r + 1]; ++k) {
      out.row(static_cast<Eigen::Index>(r)) +=
          values_[k] * dense.row(static_cast<Eigen::Index>(col_index_[k]));
    }
  }
  return out;
}

Matrix SparseMatrix::multiply_transposed(const Matrix& dense) const {
  if (static_cast<std::size_t>(dense.rows()) != rows_) throw InvalidInput("spmm^T shape mismatch");
  Matrix out = Matrix::Zero(static_cast<Eigen::Index>(cols_), dense.cols());
  for (std::size_t r = 0; r < rows_; ++r) {
    for (std::size_t k = row_start_[r]; k < row_start_[r + 1]; ++k) {
      out.row(static_cast<Eigen::Index>(col_index_[k])) +=
          values_[k] * dense.row(static_cast<Eigen::Index>(r));
    }
  }
  return out;
}

Matrix SparseMatrix::to_dense() const {
  Matrix out = Matrix::Zero(static_cast<Eigen::Index>(rows_), static_cast<Eigen::Index>(cols_));
  for (std::size_t r = 0; r < rows_; ++r) {
    for (std::size_t k = row_start_[r]; k < row_start_[r + 1]; ++k) {
      out(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(col_index_[k])) += values_[k];
    }
  }
  return out;
}

}  // namespace graphmask
