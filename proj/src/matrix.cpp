#include "rsacdda/matrix.hpp"

#include <cassert>
#include <cmath>

#include "rsacdda/kernels.hpp"

namespace rsacdda {

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Matrix& Matrix::operator+=(const Matrix& rhs) {
  assert(rows_ == rhs.rows_ && cols_ == rhs.cols_);
  kernels::active().add(data(), rhs.data(), data(), size());
  return *this;
}

Matrix& Matrix::operator-=(const Matrix& rhs) {
  assert(rows_ == rhs.rows_ && cols_ == rhs.cols_);
  kernels::active().sub(data(), rhs.data(), data(), size());
  return *this;
}

Matrix& Matrix::operator*=(double s) {
  kernels::active().scale(s, data(), size());
  return *this;
}

bool Matrix::all_finite() const {
  for (double v : data_)
    if (!std::isfinite(v)) return false;
  return true;
}

Matrix matmul(const Matrix& a, const Matrix& b) {
  assert(a.cols() == b.rows());
  Matrix c(a.rows(), b.cols());
  kernels::active().gemm_nn(c.data(), a.data(), b.data(), a.rows(), a.cols(), b.cols());
  return c;
}

Matrix matmul_tn(const Matrix& a, const Matrix& b) {
  assert(a.rows() == b.rows());
  Matrix c(a.cols(), b.cols());
  kernels::active().gemm_tn(c.data(), a.data(), b.data(), a.cols(), a.rows(), b.cols());
  return c;
}

Matrix matmul_nt(const Matrix& a, const Matrix& b) {
  assert(a.cols() == b.cols());
  Matrix c(a.rows(), b.rows());
  kernels::active().gemm_nt(c.data(), a.data(), b.data(), a.rows(), a.cols(), b.rows());
  return c;
}

Matrix transpose(const Matrix& a) {
  Matrix t(a.cols(), a.rows());
  for (std::size_t j = 0; j < a.cols(); ++j)
    for (std::size_t i = 0; i < a.rows(); ++i) t(j, i) = a(i, j);
  return t;
}

Matrix operator+(const Matrix& a, const Matrix& b) {
  Matrix c = a;
  c += b;
  return c;
}

Matrix operator-(const Matrix& a, const Matrix& b) {
  Matrix c = a;
  c -= b;
  return c;
}

Matrix operator*(double s, const Matrix& a) {
  Matrix c = a;
  c *= s;
  return c;
}

double frobenius_norm(const Matrix& a) {
  return std::sqrt(kernels::active().sum_sq(a.data(), a.size()));
}

double max_abs(const Matrix& a) { return kernels::active().max_abs(a.data(), a.size()); }

double max_abs_diff(const Matrix& a, const Matrix& b) {
  assert(a.rows() == b.rows() && a.cols() == b.cols());
  return kernels::active().max_abs_diff(a.data(), b.data(), a.size());
}

double inner(const Matrix& a, const Matrix& b) {
  assert(a.rows() == b.rows() && a.cols() == b.cols());
  return kernels::active().dot(a.data(), b.data(), a.size());
}

double trace(const Matrix& a) {
  const std::size_t n = a.rows() < a.cols() ? a.rows() : a.cols();
  double t = 0.0;
  for (std::size_t i = 0; i < n; ++i) t += a(i, i);
  return t;
}

Matrix symmetrize(const Matrix& a) {
  assert(a.rows() == a.cols());
  Matrix s(a.rows(), a.cols());
  for (std::size_t j = 0; j < a.cols(); ++j)
    for (std::size_t i = 0; i < a.rows(); ++i) s(i, j) = 0.5 * (a(i, j) + a(j, i));
  return s;
}

}  // namespace rsacdda
