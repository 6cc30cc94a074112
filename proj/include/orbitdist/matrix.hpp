#pragma once

#include <algorithm>
#include <cassert>
#include <cmath>
#include <complex>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

#include "orbitdist/errors.hpp"

namespace orbitdist {

using complex = std::complex<double>;

// Dense row-major complex matrix. Small (dim <~ 200) by intent; every
// operation allocates a fresh result.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols) {}
  explicit Matrix(std::size_t dim) : Matrix(dim, dim) {}

  Matrix(std::initializer_list<std::initializer_list<complex>> rows) {
    rows_ = rows.size();
    cols_ = rows_ == 0 ? 0 : rows.begin()->size();
    data_.reserve(rows_ * cols_);
    for (const auto& row : rows) {
      if (row.size() != cols_) throw DimensionMismatch("ragged initializer");
      data_.insert(data_.end(), row.begin(), row.end());
    }
  }

  static Matrix identity(std::size_t dim) {
    Matrix m(dim);
    for (std::size_t i = 0; i < dim; ++i) m(i, i) = 1.0;
    return m;
  }

  static Matrix diagonal(std::span<const double> values) {
    Matrix m(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) m(i, i) = values[i];
    return m;
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool square() const { return rows_ == cols_; }
  std::size_t dim() const { return rows_; }

  complex& operator()(std::size_t i, std::size_t j) {
    assert(i < rows_ && j < cols_);
    return data_[i * cols_ + j];
  }
  const complex& operator()(std::size_t i, std::size_t j) const {
    assert(i < rows_ && j < cols_);
    return data_[i * cols_ + j];
  }

  std::span<const complex> data() const { return data_; }

  Matrix adjoint() const {
    Matrix m(cols_, rows_);
    for (std::size_t i = 0; i < rows_; ++i)
      for (std::size_t j = 0; j < cols_; ++j) m(j, i) = std::conj((*this)(i, j));
    return m;
  }

  Matrix& operator+=(const Matrix& o) {
    check_same_shape(o);
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += o.data_[i];
    return *this;
  }
  Matrix& operator-=(const Matrix& o) {
    check_same_shape(o);
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= o.data_[i];
    return *this;
  }
  Matrix& operator*=(complex s) {
    for (auto& x : data_) x *= s;
    return *this;
  }

  friend Matrix operator+(Matrix a, const Matrix& b) { return a += b; }
  friend Matrix operator-(Matrix a, const Matrix& b) { return a -= b; }
  friend Matrix operator*(Matrix a, complex s) { return a *= s; }
  friend Matrix operator*(complex s, Matrix a) { return a *= s; }
  friend Matrix operator*(double s, Matrix a) { return a *= complex(s); }

  friend Matrix operator*(const Matrix& a, const Matrix& b) {
    if (a.cols_ != b.rows_) throw DimensionMismatch("matrix product shapes");
    Matrix m(a.rows_, b.cols_);
    for (std::size_t i = 0; i < a.rows_; ++i)
      for (std::size_t l = 0; l < a.cols_; ++l) {
        const complex x = a(i, l);
        if (x == complex{}) continue;
        for (std::size_t j = 0; j < b.cols_; ++j) m(i, j) += x * b(l, j);
      }
    return m;
  }

  friend bool operator==(const Matrix&, const Matrix&) = default;

  double frobenius() const {
    double s = 0;
    for (const auto& x : data_) s += std::norm(x);
    return std::sqrt(s);
  }

  double max_abs() const {
    double m = 0;
    for (const auto& x : data_) m = std::max(m, std::abs(x));
    return m;
  }

  complex trace() const {
    complex t{};
    for (std::size_t i = 0; i < std::min(rows_, cols_); ++i) t += (*this)(i, i);
    return t;
  }

  // Columns [first, first + count).
  Matrix columns(std::size_t first, std::size_t count) const {
    Matrix m(rows_, count);
    for (std::size_t i = 0; i < rows_; ++i)
      for (std::size_t j = 0; j < count; ++j) m(i, j) = (*this)(i, first + j);
    return m;
  }

  void set_columns(std::size_t first, const Matrix& cols) {
    if (cols.rows_ != rows_ || first + cols.cols_ > cols_) throw DimensionMismatch("set_columns");
    for (std::size_t i = 0; i < rows_; ++i)
      for (std::size_t j = 0; j < cols.cols_; ++j) (*this)(i, first + j) = cols(i, j);
  }

  Matrix block(std::size_t row, std::size_t col, std::size_t nrows, std::size_t ncols) const {
    Matrix m(nrows, ncols);
    for (std::size_t i = 0; i < nrows; ++i)
      for (std::size_t j = 0; j < ncols; ++j) m(i, j) = (*this)(row + i, col + j);
    return m;
  }

  void set_block(std::size_t row, std::size_t col, const Matrix& b) {
    if (row + b.rows_ > rows_ || col + b.cols_ > cols_) throw DimensionMismatch("set_block");
    for (std::size_t i = 0; i < b.rows_; ++i)
      for (std::size_t j = 0; j < b.cols_; ++j) (*this)(row + i, col + j) = b(i, j);
  }

 private:
  void check_same_shape(const Matrix& o) const {
    if (rows_ != o.rows_ || cols_ != o.cols_) throw DimensionMismatch("shape mismatch");
  }

  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<complex> data_;
};

// Block diagonal of the given square blocks, in order.
inline Matrix block_diagonal(std::span<const Matrix> blocks) {
  std::size_t dim = 0;
  for (const auto& b : blocks) dim += b.rows();
  Matrix m(dim);
  std::size_t at = 0;
  for (const auto& b : blocks) {
    m.set_block(at, at, b);
    at += b.rows();
  }
  return m;
}

// `copies` copies of `block` followed by `zeros` zero blocks of the same size.
inline Matrix repeat_block(const Matrix& block, std::size_t copies, std::size_t zeros = 0) {
  const std::size_t k = block.rows();
  Matrix m(k * (copies + zeros));
  for (std::size_t c = 0; c < copies; ++c) m.set_block(c * k, c * k, block);
  return m;
}

inline Matrix commutator(const Matrix& a, const Matrix& b) { return a * b - b * a; }

}  // namespace orbitdist
