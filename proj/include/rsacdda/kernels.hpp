#pragma once

#include <cstddef>
#include <vector>

namespace rsacdda::kernels {

/// One implementation of the data-parallel inner loops. All matrix arguments are
/// packed column-major doubles (leading dimension == row count). Every entry is a
/// plain function pointer so the active set can be swapped at runtime.
struct KernelTable {
  const char* name;

  double (*dot)(const double* x, const double* y, std::size_t n);
  /// y += a * x
  void (*axpy)(double a, const double* x, double* y, std::size_t n);
  void (*scale)(double a, double* x, std::size_t n);
  void (*add)(const double* x, const double* y, double* out, std::size_t n);
  void (*sub)(const double* x, const double* y, double* out, std::size_t n);
  /// out[i] = sign(x[i]) * max(|x[i]| - tau, 0)
  void (*soft_threshold)(const double* x, double tau, double* out, std::size_t n);
  double (*sum_sq)(const double* x, std::size_t n);
  double (*sq_dist)(const double* x, const double* y, std::size_t n);
  double (*max_abs)(const double* x, std::size_t n);
  double (*max_abs_diff)(const double* x, const double* y, std::size_t n);

  /// c (m×n) = a (m×k) · b (k×n)
  void (*gemm_nn)(double* c, const double* a, const double* b, std::size_t m,
                  std::size_t k, std::size_t n);
  /// c (m×n) = aᵀ · b with a stored (k×m), b stored (k×n)
  void (*gemm_tn)(double* c, const double* a, const double* b, std::size_t m,
                  std::size_t k, std::size_t n);
  /// c (m×n) = a · bᵀ with a stored (m×k), b stored (n×k)
  void (*gemm_nt)(double* c, const double* a, const double* b, std::size_t m,
                  std::size_t k, std::size_t n);
};

/// Portable reference implementation; always present.
const KernelTable& scalar_table();

#if defined(__x86_64__) || defined(_M_X64)
const KernelTable& avx2_table();
#endif
#if defined(__aarch64__)
const KernelTable& neon_table();
#endif

/// The runtime-selected table: best instruction set the CPU supports, overridable
/// with RSACDDA_KERNELS=scalar|avx2|neon. The choice is made once per process.
const KernelTable& active();

/// Every table this build can run on this CPU (scalar first). Used by the
/// equivalence tests.
std::vector<const KernelTable*> supported_tables();

}  // namespace rsacdda::kernels
