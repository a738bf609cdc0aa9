// Runtime kernel selection.

#include "rsacdda/kernels.hpp"

#include <cstdio>
#include <cstdlib>
#include <cstring>

namespace rsacdda::kernels {
namespace {

bool cpu_has_avx2() {
#if defined(__x86_64__) || defined(_M_X64)
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

const KernelTable* best_table() {
#if defined(__x86_64__) || defined(_M_X64)
  if (cpu_has_avx2()) return &avx2_table();
#endif
#if defined(__aarch64__)
  return &neon_table();
#endif
  return &scalar_table();
}

const KernelTable* select() {
  const char* req = std::getenv("RSACDDA_KERNELS");
  if (req == nullptr || *req == '\0') return best_table();
  if (std::strcmp(req, "scalar") == 0) return &scalar_table();
#if defined(__x86_64__) || defined(_M_X64)
  if (std::strcmp(req, "avx2") == 0) {
    if (cpu_has_avx2()) return &avx2_table();
    std::fprintf(stderr, "rsacdda: RSACDDA_KERNELS=avx2 requested but CPU lacks AVX2/FMA; using scalar\n");
    return &scalar_table();
  }
#endif
#if defined(__aarch64__)
  if (std::strcmp(req, "neon") == 0) return &neon_table();
#endif
  std::fprintf(stderr, "rsacdda: unknown RSACDDA_KERNELS=%s; using %s\n", req,
               best_table()->name);
  return best_table();
}

}  // namespace

const KernelTable& active() {
  static const KernelTable* chosen = select();
  return *chosen;
}

std::vector<const KernelTable*> supported_tables() {
  std::vector<const KernelTable*> out{&scalar_table()};
#if defined(__x86_64__) || defined(_M_X64)
  if (cpu_has_avx2()) out.push_back(&avx2_table());
#endif
#if defined(__aarch64__)
  out.push_back(&neon_table());
#endif
  return out;
}

}  // namespace rsacdda::kernels
