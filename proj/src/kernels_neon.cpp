// NEON kernel variants for aarch64 (float64x2_t lanes).

#if defined(__aarch64__)

#include "rsacdda/kernels.hpp"

#include <arm_neon.h>

#include <cmath>
#include <cstring>

namespace rsacdda::kernels {
namespace {

double dot_neon(const double* x, const double* y, std::size_t n) {
  float64x2_t acc0 = vdupq_n_f64(0.0);
  float64x2_t acc1 = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    acc0 = vfmaq_f64(acc0, vld1q_f64(x + i), vld1q_f64(y + i));
    acc1 = vfmaq_f64(acc1, vld1q_f64(x + i + 2), vld1q_f64(y + i + 2));
  }
  double acc = vaddvq_f64(vaddq_f64(acc0, acc1));
  for (; i < n; ++i) acc += x[i] * y[i];
  return acc;
}

void axpy_neon(double a, const double* x, double* y, std::size_t n) {
  const float64x2_t av = vdupq_n_f64(a);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2)
    vst1q_f64(y + i, vfmaq_f64(vld1q_f64(y + i), av, vld1q_f64(x + i)));
  for (; i < n; ++i) y[i] += a * x[i];
}

void scale_neon(double a, double* x, std::size_t n) {
  const float64x2_t av = vdupq_n_f64(a);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) vst1q_f64(x + i, vmulq_f64(av, vld1q_f64(x + i)));
  for (; i < n; ++i) x[i] *= a;
}

void add_neon(const double* x, const double* y, double* out, std::size_t n) {
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2)
    vst1q_f64(out + i, vaddq_f64(vld1q_f64(x + i), vld1q_f64(y + i)));
  for (; i < n; ++i) out[i] = x[i] + y[i];
}

void sub_neon(const double* x, const double* y, double* out, std::size_t n) {
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2)
    vst1q_f64(out + i, vsubq_f64(vld1q_f64(x + i), vld1q_f64(y + i)));
  for (; i < n; ++i) out[i] = x[i] - y[i];
}

void soft_threshold_neon(const double* x, double tau, double* out, std::size_t n) {
  const float64x2_t tv = vdupq_n_f64(tau);
  const float64x2_t zero = vdupq_n_f64(0.0);
  const uint64x2_t sign_mask = vdupq_n_u64(0x8000000000000000ull);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    float64x2_t v = vld1q_f64(x + i);
    uint64x2_t sign = vandq_u64(vreinterpretq_u64_f64(v), sign_mask);
    float64x2_t mag = vmaxq_f64(vsubq_f64(vabsq_f64(v), tv), zero);
    vst1q_f64(out + i, vreinterpretq_f64_u64(vorrq_u64(vreinterpretq_u64_f64(mag), sign)));
  }
  for (; i < n; ++i) {
    const double mag = std::fabs(x[i]) - tau;
    out[i] = mag > 0.0 ? std::copysign(mag, x[i]) : 0.0;
  }
}

double sum_sq_neon(const double* x, std::size_t n) {
  float64x2_t acc = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    float64x2_t v = vld1q_f64(x + i);
    acc = vfmaq_f64(acc, v, v);
  }
  double s = vaddvq_f64(acc);
  for (; i < n; ++i) s += x[i] * x[i];
  return s;
}

double sq_dist_neon(const double* x, const double* y, std::size_t n) {
  float64x2_t acc = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    float64x2_t d = vsubq_f64(vld1q_f64(x + i), vld1q_f64(y + i));
    acc = vfmaq_f64(acc, d, d);
  }
  double s = vaddvq_f64(acc);
  for (; i < n; ++i) {
    const double d = x[i] - y[i];
    s += d * d;
  }
  return s;
}

double max_abs_neon(const double* x, std::size_t n) {
  float64x2_t acc = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) acc = vmaxq_f64(acc, vabsq_f64(vld1q_f64(x + i)));
  double s = vmaxvq_f64(acc);
  for (; i < n; ++i) s = std::max(s, std::fabs(x[i]));
  return s;
}

double max_abs_diff_neon(const double* x, const double* y, std::size_t n) {
  float64x2_t acc = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2)
    acc = vmaxq_f64(acc, vabsq_f64(vsubq_f64(vld1q_f64(x + i), vld1q_f64(y + i))));
  double s = vmaxvq_f64(acc);
  for (; i < n; ++i) s = std::max(s, std::fabs(x[i] - y[i]));
  return s;
}

// 4 rows × 4 columns of c in registers while streaming k.
void gemm_nn_neon(double* c, const double* a, const double* b, std::size_t m,
                  std::size_t k, std::size_t n) {
  std::memset(c, 0, m * n * sizeof(double));
  std::size_t j = 0;
  for (; j + 4 <= n; j += 4) {
    const double* b0 = b + (j + 0) * k;
    const double* b1 = b + (j + 1) * k;
    const double* b2 = b + (j + 2) * k;
    const double* b3 = b + (j + 3) * k;
    std::size_t i = 0;
    for (; i + 4 <= m; i += 4) {
      float64x2_t c00 = vdupq_n_f64(0.0), c01 = vdupq_n_f64(0.0);
      float64x2_t c10 = vdupq_n_f64(0.0), c11 = vdupq_n_f64(0.0);
      float64x2_t c20 = vdupq_n_f64(0.0), c21 = vdupq_n_f64(0.0);
      float64x2_t c30 = vdupq_n_f64(0.0), c31 = vdupq_n_f64(0.0);
      for (std::size_t l = 0; l < k; ++l) {
        const double* al = a + l * m + i;
        const float64x2_t a0 = vld1q_f64(al);
        const float64x2_t a1 = vld1q_f64(al + 2);
        float64x2_t bv = vdupq_n_f64(b0[l]);
        c00 = vfmaq_f64(c00, a0, bv);
        c01 = vfmaq_f64(c01, a1, bv);
        bv = vdupq_n_f64(b1[l]);
        c10 = vfmaq_f64(c10, a0, bv);
        c11 = vfmaq_f64(c11, a1, bv);
        bv = vdupq_n_f64(b2[l]);
        c20 = vfmaq_f64(c20, a0, bv);
        c21 = vfmaq_f64(c21, a1, bv);
        bv = vdupq_n_f64(b3[l]);
        c30 = vfmaq_f64(c30, a0, bv);
        c31 = vfmaq_f64(c31, a1, bv);
      }
      double* cj = c + j * m + i;
      vst1q_f64(cj, c00);
      vst1q_f64(cj + 2, c01);
      vst1q_f64(cj + m, c10);
      vst1q_f64(cj + m + 2, c11);
      vst1q_f64(cj + 2 * m, c20);
      vst1q_f64(cj + 2 * m + 2, c21);
      vst1q_f64(cj + 3 * m, c30);
      vst1q_f64(cj + 3 * m + 2, c31);
    }
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
  for (; j < n; ++j) {
    double* cj = c + j * m;
    const double* bj = b + j * k;
    for (std::size_t l = 0; l < k; ++l) {
      if (bj[l] == 0.0) continue;
      axpy_neon(bj[l], a + l * m, cj, m);
    }
  }
}

void gemm_tn_neon(double* c, const double* a, const double* b, std::size_t m,
                  std::size_t k, std::size_t n) {
  for (std::size_t j = 0; j < n; ++j) {
    const double* bj = b + j * k;
    double* cj = c + j * m;
    for (std::size_t i = 0; i < m; ++i) cj[i] = dot_neon(a + i * k, bj, k);
  }
}

void gemm_nt_neon(double* c, const double* a, const double* b, std::size_t m,
                  std::size_t k, std::size_t n) {
  std::memset(c, 0, m * n * sizeof(double));
  for (std::size_t j = 0; j < n; ++j) {
    double* cj = c + j * m;
    for (std::size_t l = 0; l < k; ++l) {
      const double bjl = b[j + l * n];
      if (bjl == 0.0) continue;
      axpy_neon(bjl, a + l * m, cj, m);
    }
  }
}

}  // namespace

const KernelTable& neon_table() {
  static const KernelTable table = {
      "neon",        dot_neon,     axpy_neon,    scale_neon,
      add_neon,      sub_neon,     soft_threshold_neon,
      sum_sq_neon,   sq_dist_neon, max_abs_neon, max_abs_diff_neon,
      gemm_nn_neon,  gemm_tn_neon, gemm_nt_neon,
  };
  return table;
}

}  // namespace rsacdda::kernels

#endif  // aarch64
