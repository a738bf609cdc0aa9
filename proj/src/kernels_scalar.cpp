// Scalar reference kernels. This translation unit is built with -ffp-contract=off
// so the reference results do not depend on compiler FMA contraction; the SIMD
// variants are equivalence-tested against these.

#include "rsacdda/kernels.hpp"

#include <cmath>
#include <cstring>

namespace rsacdda::kernels {
namespace {

double dot_scalar(const double* x, const double* y, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += x[i] * y[i];
  return acc;
}

void axpy_scalar(double a, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

void scale_scalar(double a, double* x, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) x[i] *= a;
}

void add_scalar(const double* x, const double* y, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = x[i] + y[i];
}

void sub_scalar(const double* x, const double* y, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = x[i] - y[i];
}

void soft_threshold_scalar(const double* x, double tau, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    const double mag = std::fabs(x[i]) - tau;
    out[i] = mag > 0.0 ? std::copysign(mag, x[i]) : 0.0;
  }
}

double sum_sq_scalar(const double* x, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += x[i] * x[i];
  return acc;
}

double sq_dist_scalar(const double* x, const double* y, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = x[i] - y[i];
    acc += d * d;
  }
  return acc;
}

double max_abs_scalar(const double* x, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double v = std::fabs(x[i]);
    if (v > acc) acc = v;
  }
  return acc;
}

double max_abs_diff_scalar(const double* x, const double* y, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double v = std::fabs(x[i] - y[i]);
    if (v > acc) acc = v;
  }
  return acc;
}

// c = a·b, all packed column-major. Inner update is a column axpy so the access
// pattern stays unit-stride.
void gemm_nn_scalar(double* c, const double* a, const double* b, std::size_t m,
                    std::size_t k, std::size_t n) {
  std::memset(c, 0, m * n * sizeof(double));
  for (std::size_t j = 0; j < n; ++j) {
    double* cj = c + j * m;
    const double* bj = b + j * k;
    for (std::size_t l = 0; l < k; ++l) {
      const double blj = bj[l];
      if (blj == 0.0) continue;
      const double* al = a + l * m;
      for (std::size_t i = 0; i < m; ++i) cj[i] += blj * al[i];
    }
  }
}

// c = aᵀ·b: every entry is a unit-stride dot of two columns.
void gemm_tn_scalar(double* c, const double* a, const double* b, std::size_t m,
                    std::size_t k, std::size_t n) {
  for (std::size_t j = 0; j < n; ++j) {
    const double* bj = b + j * k;
    double* cj = c + j * m;
    for (std::size_t i = 0; i < m; ++i) cj[i] = dot_scalar(a + i * k, bj, k);
  }
}

// c = a·bᵀ with b stored (n×k): c(:,j) = Σ_l b(j,l) · a(:,l)
void gemm_nt_scalar(double* c, const double* a, const double* b, std::size_t m,
                    std::size_t k, std::size_t n) {
  std::memset(c, 0, m * n * sizeof(double));
  for (std::size_t j = 0; j < n; ++j) {
    double* cj = c + j * m;
    for (std::size_t l = 0; l < k; ++l) {
      const double bjl = b[j + l * n];
      if (bjl == 0.0) continue;
      const double* al = a + l * m;
      for (std::size_t i = 0; i < m; ++i) cj[i] += bjl * al[i];
    }
  }
}

}  // namespace

const KernelTable& scalar_table() {
  static const KernelTable table = {
      "scalar",        dot_scalar,     axpy_scalar,    scale_scalar,
      add_scalar,      sub_scalar,     soft_threshold_scalar,
      sum_sq_scalar,   sq_dist_scalar, max_abs_scalar, max_abs_diff_scalar,
      gemm_nn_scalar,  gemm_tn_scalar, gemm_nt_scalar,
  };
  return table;
}

}  // namespace rsacdda::kernels
