#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Core>

namespace graphmask {

/// Row-major dense storage used for every real-valued quantity.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Compressed-row sparse matrix; only what graph propagation needs.
class SparseMatrix {
 public:
  struct Entry {
    std::size_t row;
    std::size_t col;
    double value;
  };

  SparseMatrix(std::size_t rows, std::size_t cols, std::vector<Entry> entries);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t nonzeros() const { return values_.size(); }

  /// this * dense
  Matrix multiply(const Matrix& dense) const;
  /// this^T * dense
  Matrix multiply_transposed(const Matrix& dense) const;
  Matrix to_dense() const;

 private:
  std::size_t rows_;
  std::size_t cols_;
  std::vector<std::size_t> row_start_;
  std::vector<std::size_t> col_index_;
  std::vector<double> values_;
};

}  // namespace graphmask
