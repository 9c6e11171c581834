#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "adasel/errors.hpp"

namespace adasel {

/// Dense row-major matrix of doubles.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  static Matrix from_rows(const std::vector<std::vector<double>>& rows) {
    if (rows.empty()) return {};
    Matrix m(rows.size(), rows.front().size());
    for (std::size_t r = 0; r < rows.size(); ++r) {
      if (rows[r].size() != m.cols_)
        throw ShapeError("Matrix::from_rows: ragged rows");
      for (std::size_t c = 0; c < m.cols_; ++c) m(r, c) = rows[r][c];
    }
    return m;
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool empty() const { return rows_ == 0; }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const {
    return {data_.data() + r * cols_, cols_};
  }

  std::vector<double> column(std::size_t c) const {
    std::vector<double> out(rows_);
    for (std::size_t r = 0; r < rows_; ++r) out[r] = (*this)(r, c);
    return out;
  }

  /// Rows in `row_ids` order.
  Matrix select_rows(std::span<const std::size_t> row_ids) const {
    Matrix m(row_ids.size(), cols_);
    for (std::size_t i = 0; i < row_ids.size(); ++i) {
      auto src = row(row_ids[i]);
      std::copy(src.begin(), src.end(), m.row(i).begin());
    }
    return m;
  }

  /// Columns in `col_ids` order.
  Matrix select_cols(std::span<const std::size_t> col_ids) const {
    Matrix m(rows_, col_ids.size());
    for (std::size_t r = 0; r < rows_; ++r)
      for (std::size_t i = 0; i < col_ids.size(); ++i) m(r, i) = (*this)(r, col_ids[i]);
    return m;
  }

  const std::vector<double>& data() const { return data_; }

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

}  // namespace adasel
