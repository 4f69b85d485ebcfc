#include "netbound/dense_matrix.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>

#include "netbound/errors.hpp"

namespace netbound {

DenseMatrix::DenseMatrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

DenseMatrix::DenseMatrix(std::initializer_list<std::initializer_list<double>> rows) {
  rows_ = rows.size();
  cols_ = rows_ == 0 ? 0 : rows.begin()->size();
  data_.reserve(rows_ * cols_);
  for (const auto& r : rows) {
    if (r.size() != cols_) throw PreconditionError("DenseMatrix: ragged initializer");
    data_.insert(data_.end(), r.begin(), r.end());
  }
}

DenseMatrix DenseMatrix::identity(std::size_t n) {
  DenseMatrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

DenseMatrix DenseMatrix::diagonal(std::span<const double> d) {
  DenseMatrix m(d.size(), d.size());
  for (std::size_t i = 0; i < d.size(); ++i) m(i, i) = d[i];
  return m;
}

DenseMatrix DenseMatrix::transpose() const {
  DenseMatrix t(cols_, rows_);
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
  return t;
}

Vector DenseMatrix::diagonal_entries() const {
  Vector d(std::min(rows_, cols_));
  for (std::size_t i = 0; i < d.size(); ++i) d[i] = (*this)(i, i);
  return d;
}

Vector DenseMatrix::operator*(std::span<const double> x) const {
  if (x.size() != cols_) throw PreconditionError("DenseMatrix: matrix-vector size mismatch");
  Vector y(rows_, 0.0);
  for (std::size_t i = 0; i < rows_; ++i) {
    double acc = 0.0;
    for (std::size_t j = 0; j < cols_; ++j) acc += data_[i * cols_ + j] * x[j];
    y[i] = acc;
  }
  return y;
}

double DenseMatrix::norm_inf() const {
  double best = 0.0;
  for (std::size_t i = 0; i < rows_; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < cols_; ++j) s += std::abs((*this)(i, j));
    best = std::max(best, s);
  }
  return best;
}

double DenseMatrix::max_abs() const {
  double best = 0.0;
  for (double v : data_) best = std::max(best, std::abs(v));
  return best;
}

DenseMatrix operator*(const DenseMatrix& a, const DenseMatrix& b) {
  if (a.cols_ != b.rows_) throw PreconditionError("DenseMatrix: product size mismatch");
  DenseMatrix c(a.rows_, b.cols_);
  for (std::size_t i = 0; i < a.rows_; ++i)
    for (std::size_t k = 0; k < a.cols_; ++k) {
      const double aik = a(i, k);
      if (aik == 0.0) continue;
      for (std::size_t j = 0; j < b.cols_; ++j) c(i, j) += aik * b(k, j);
    }
  return c;
}

DenseMatrix operator+(const DenseMatrix& a, const DenseMatrix& b) {
  if (a.rows_ != b.rows_ || a.cols_ != b.cols_)
    throw PreconditionError("DenseMatrix: sum size mismatch");
  DenseMatrix c = a;
  for (std::size_t k = 0; k < c.data_.size(); ++k) c.data_[k] += b.data_[k];
  return c;
}

DenseMatrix operator-(const DenseMatrix& a, const DenseMatrix& b) {
  if (a.rows_ != b.rows_ || a.cols_ != b.cols_)
    throw PreconditionError("DenseMatrix: difference size mismatch");
  DenseMatrix c = a;
  for (std::size_t k = 0; k < c.data_.size(); ++k) c.data_[k] -= b.data_[k];
  return c;
}

DenseMatrix operator*(double s, const DenseMatrix& a) {
  DenseMatrix c = a;
  for (double& v : c.data_) v *= s;
  return c;
}

std::ostream& operator<<(std::ostream& os, const DenseMatrix& m) {
  if (m.empty()) return os << "[]  (" << m.rows() << "x" << m.cols() << ")\n";
  const auto flags = os.flags();
  const auto prec = os.precision();
  os << std::setprecision(6);
  for (std::size_t i = 0; i < m.rows(); ++i) {
    os << (i == 0 ? "[[" : " [");
    for (std::size_t j = 0; j < m.cols(); ++j) {
      if (j) os << ", ";
      os << std::setw(11) << m(i, j) + 0.0;
    }
    os << (i + 1 == m.rows() ? "]]\n" : "]\n");
  }
  os.flags(flags);
  os.precision(prec);
  return os;
}

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double euclidean_norm(std::span<const double> x) { return std::sqrt(dot(x, x)); }

}  // namespace netbound
