#pragma once

#include <cstddef>
#include <initializer_list>
#include <iosfwd>
#include <span>
#include <vector>

namespace netbound {

using Vector = std::vector<double>;

/// Row-major dense matrix of doubles. Zero-sized dimensions are allowed so
/// that empty follower blocks can be represented without special cases.
class DenseMatrix {
 public:
  DenseMatrix() = default;
  DenseMatrix(std::size_t rows, std::size_t cols, double fill = 0.0);
  DenseMatrix(std::initializer_list<std::initializer_list<double>> rows);

  static DenseMatrix identity(std::size_t n);
  static DenseMatrix diagonal(std::span<const double> d);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool is_square() const { return rows_ == cols_; }
  bool empty() const { return rows_ == 0 || cols_ == 0; }

  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  std::span<const double> data() const { return data_; }
  std::span<const double> row(std::size_t i) const {
    return std::span<const double>(data_).subspan(i * cols_, cols_);
  }

  DenseMatrix transpose() const;
  Vector diagonal_entries() const;
  Vector operator*(std::span<const double> x) const;

  /// Largest absolute row sum.
  double norm_inf() const;
  double max_abs() const;

  friend DenseMatrix operator*(const DenseMatrix& a, const DenseMatrix& b);
  friend DenseMatrix operator+(const DenseMatrix& a, const DenseMatrix& b);
  friend DenseMatrix operator-(const DenseMatrix& a, const DenseMatrix& b);
  friend DenseMatrix operator*(double s, const DenseMatrix& a);
  friend bool operator==(const DenseMatrix& a, const DenseMatrix& b) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  Vector data_;
};

std::ostream& operator<<(std::ostream& os, const DenseMatrix& m);

double dot(std::span<const double> a, std::span<const double> b);
double euclidean_norm(std::span<const double> x);

}  // namespace netbound
