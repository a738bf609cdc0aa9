// AVX2+FMA kernel variants. Only compiled on x86-64; only dispatched when the
// CPU reports AVX2 and FMA support.

#if defined(__x86_64__) || defined(_M_X64)

#include "rsacdda/kernels.hpp"

#include <immintrin.h>

#include <cmath>
#include <cstring>

namespace rsacdda::kernels {
namespace {

inline double hsum(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_add_pd(lo, hi);
  __m128d sw = _mm_unpackhi_pd(lo, lo);
  return _mm_cvtsd_f64(_mm_add_sd(lo, sw));
}

inline double hmax(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_max_pd(lo, hi);
  __m128d sw = _mm_unpackhi_pd(lo, lo);
  return _mm_cvtsd_f64(_mm_max_sd(lo, sw));
}

double dot_avx2(const double* x, const double* y, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), acc0);
    acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i + 4), _mm256_loadu_pd(y + i + 4), acc1);
  }
  for (; i + 4 <= n; i += 4)
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), acc0);
  double acc = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) acc += x[i] * y[i];
  return acc;
}

void axpy_avx2(double a, const double* x, double* y, std::size_t n) {
  const __m256d av = _mm256_set1_pd(a);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d yv = _mm256_loadu_pd(y + i);
    yv = _mm256_fmadd_pd(av, _mm256_loadu_pd(x + i), yv);
    _mm256_storeu_pd(y + i, yv);
  }
  for (; i < n; ++i) y[i] += a * x[i];
}

void scale_avx2(double a, double* x, std::size_t n) {
  const __m256d av = _mm256_set1_pd(a);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(x + i, _mm256_mul_pd(av, _mm256_loadu_pd(x + i)));
  for (; i < n; ++i) x[i] *= a;
}

void add_avx2(const double* x, const double* y, double* out, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(out + i, _mm256_add_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
  for (; i < n; ++i) out[i] = x[i] + y[i];
}

void sub_avx2(const double* x, const double* y, double* out, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(out + i, _mm256_sub_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
  for (; i < n; ++i) out[i] = x[i] - y[i];
}

void soft_threshold_avx2(const double* x, double tau, double* out, std::size_t n) {
  const __m256d sign_mask = _mm256_set1_pd(-0.0);
  const __m256d tv = _mm256_set1_pd(tau);
  const __m256d zero = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d v = _mm256_loadu_pd(x + i);
    __m256d sign = _mm256_and_pd(v, sign_mask);
    __m256d mag = _mm256_sub_pd(_mm256_andnot_pd(sign_mask, v), tv);
    mag = _mm256_max_pd(mag, zero);
    _mm256_storeu_pd(out + i, _mm256_or_pd(mag, sign));
  }
  for (; i < n; ++i) {
    const double mag = std::fabs(x[i]) - tau;
    out[i] = mag > 0.0 ? std::copysign(mag, x[i]) : 0.0;
  }
}

double sum_sq_avx2(const double* x, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d v = _mm256_loadu_pd(x + i);
    acc = _mm256_fmadd_pd(v, v, acc);
  }
  double s = hsum(acc);
  for (; i < n; ++i) s += x[i] * x[i];
  return s;
}

double sq_dist_avx2(const double* x, const double* y, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d d = _mm256_sub_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i));
    acc = _mm256_fmadd_pd(d, d, acc);
  }
  double s = hsum(acc);
  for (; i < n; ++i) {
    const double d = x[i] - y[i];
    s += d * d;
  }
  return s;
}

double max_abs_avx2(const double* x, std::size_t n) {
  const __m256d sign_mask = _mm256_set1_pd(-0.0);
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    acc = _mm256_max_pd(acc, _mm256_andnot_pd(sign_mask, _mm256_loadu_pd(x + i)));
  double s = hmax(acc);
  for (; i < n; ++i) s = std::max(s, std::fabs(x[i]));
  return s;
}

double max_abs_diff_avx2(const double* x, const double* y, std::size_t n) {
  const __m256d sign_mask = _mm256_set1_pd(-0.0);
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d d = _mm256_sub_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i));
    acc = _mm256_max_pd(acc, _mm256_andnot_pd(sign_mask, d));
  }
  double s = hmax(acc);
  for (; i < n; ++i) s = std::max(s, std::fabs(x[i] - y[i]));
  return s;
}

// Register-blocked c = a·b: 8 rows × 4 columns of c held in accumulators while
// streaming the shared k dimension.
void gemm_nn_avx2(double* c, const double* a, const double* b, std::size_t m,
                  std::size_t k, std::size_t n) {
  std::memset(c, 0, m * n * sizeof(double));
  std::size_t j = 0;
  for (; j + 4 <= n; j += 4) {
    const double* b0 = b + (j + 0) * k;
    const double* b1 = b + (j + 1) * k;
    const double* b2 = b + (j + 2) * k;
    const double* b3 = b + (j + 3) * k;
    std::size_t i = 0;
    for (; i + 8 <= m; i += 8) {
      __m256d c00 = _mm256_setzero_pd(), c01 = _mm256_setzero_pd();
      __m256d c10 = _mm256_setzero_pd(), c11 = _mm256_setzero_pd();
      __m256d c20 = _mm256_setzero_pd(), c21 = _mm256_setzero_pd();
      __m256d c30 = _mm256_setzero_pd(), c31 = _mm256_setzero_pd();
      for (std::size_t l = 0; l < k; ++l) {
        const double* al = a + l * m + i;
        const __m256d a0 = _mm256_loadu_pd(al);
        const __m256d a1 = _mm256_loadu_pd(al + 4);
        __m256d bv = _mm256_set1_pd(b0[l]);
        c00 = _mm256_fmadd_pd(a0, bv, c00);
        c01 = _mm256_fmadd_pd(a1, bv, c01);
        bv = _mm256_set1_pd(b1[l]);
        c10 = _mm256_fmadd_pd(a0, bv, c10);
        c11 = _mm256_fmadd_pd(a1, bv, c11);
        bv = _mm256_set1_pd(b2[l]);
        c20 = _mm256_fmadd_pd(a0, bv, c20);
        c21 = _mm256_fmadd_pd(a1, bv, c21);
        bv = _mm256_set1_pd(b3[l]);
        c30 = _mm256_fmadd_pd(a0, bv, c30);
        c31 = _mm256_fmadd_pd(a1, bv, c31);
      }
      double* cj = c + j * m + i;
      _mm256_storeu_pd(cj, c00);
      _mm256_storeu_pd(cj + 4, c01);
      _mm256_storeu_pd(cj + m, c10);
      _mm256_storeu_pd(cj + m + 4, c11);
      _mm256_storeu_pd(cj + 2 * m, c20);
      _mm256_storeu_pd(cj + 2 * m + 4, c21);
      _mm256_storeu_pd(cj + 3 * m, c30);
      _mm256_storeu_pd(cj + 3 * m + 4, c31);
    }
    // Row remainder for this 4-column block.
    for (; i < m; ++i) {
      double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
      for (std::size_t l = 0; l < k; ++l) {
        const double av = a[l * m + i];
        s0 += av * b0[l];
        s1 += av * b1[l];
        s2 += av * b2[l];
        s3 += av * b3[l];
      }
      c[(j + 0) * m + i] = s0;
      c[(j + 1) * m + i] = s1;
      c[(j + 2) * m + i] = s2;
      c[(j + 3) * m + i] = s3;
    }
  }
  // Column remainder: plain vectorized axpy per column.
  for (; j < n; ++j) {
    double* cj = c + j * m;
    const double* bj = b + j * k;
    for (std::size_t l = 0; l < k; ++l) {
      if (bj[l] == 0.0) continue;
      axpy_avx2(bj[l], a + l * m, cj, m);
    }
  }
}

void gemm_tn_avx2(double* c, const double* a, const double* b, std::size_t m,
                  std::size_t k, std::size_t n) {
  for (std::size_t j = 0; j < n; ++j) {
    const double* bj = b + j * k;
    double* cj = c + j * m;
    for (std::size_t i = 0; i < m; ++i) cj[i] = dot_avx2(a + i * k, bj, k);
  }
}

void gemm_nt_avx2(double* c, const double* a, const double* b, std::size_t m,
                  std::size_t k, std::size_t n) {
  std::memset(c, 0, m * n * sizeof(double));
  for (std::size_t j = 0; j < n; ++j) {
    double* cj = c + j * m;
    for (std::size_t l = 0; l < k; ++l) {
      const double bjl = b[j + l * n];
      if (bjl == 0.0) continue;
      axpy_avx2(bjl, a + l * m, cj, m);
    }
  }
}

}  // namespace

const KernelTable& avx2_table() {
  static const KernelTable table = {
      "avx2",        dot_avx2,     axpy_avx2,    scale_avx2,
      add_avx2,      sub_avx2,     soft_threshold_avx2,
      sum_sq_avx2,   sq_dist_avx2, max_abs_avx2, max_abs_diff_avx2,
      gemm_nn_avx2,  gemm_tn_avx2, gemm_nt_avx2,
  };
  return table;
}

}  // namespace rsacdda::kernels

#endif  // x86-64
