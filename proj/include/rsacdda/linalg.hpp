#pragma once

#include <cstddef>
#include <vector>

#include "rsacdda/matrix.hpp"

namespace rsacdda {

/// Result of a symmetric generalized eigensolve. Eigenvalues ascending; the sign
/// of each eigenvector is fixed so its first nonzero component is positive.
struct GenEigResult {
  Matrix vectors;              // m×k, columns are generalized eigenvectors
  std::vector<double> values;  // ascending
  double residual = 0.0;       // ‖L·V − R·V·diag(values)‖_F for the solved pencil
};

struct SvdResult {
  Matrix u;               // m×r, orthonormal columns
  std::vector<double> s;  // length r = min(m,n), nonnegative, descending
  Matrix v;               // n×r, orthonormal columns
};

struct SymEigResult {
  Matrix vectors;              // orthonormal columns
  std::vector<double> values;  // ascending
};

/// k generalized eigenpairs of (l, r + ridge·I) with smallest eigenvalues.
/// Both inputs must be symmetric; r + ridge·I must be positive definite.
/// Residual contract: residual ≤ 1e-8 · (1 + ‖L‖_F + ‖R‖_F).
GenEigResult gen_eig_smallest(const Matrix& l_matrix, const Matrix& r_matrix,
                              std::size_t k, double ridge = 0.0);

/// Full symmetric eigendecomposition, eigenvalues ascending.
SymEigResult sym_eig(const Matrix& a);

/// Generalized eigensolve for a PSD right matrix that may be rank-deficient:
/// the problem is deflated to the range of r (directions with eigenvalue
/// > rank_rel_tol · λ_max), and at most rank-many pairs are returned, so k is
/// clipped. Requires l to map range(r) into itself (true for the pencils this
/// library builds, where every low-rank term is zero-sum), enforced at
/// runtime through the same residual contract as gen_eig_smallest.
/// r_eig must be sym_eig(r); it is taken precomputed so callers can reuse one
/// decomposition across iterations.
GenEigResult gen_eig_smallest_deflated(const Matrix& l_matrix, const Matrix& r_matrix,
                                       const SymEigResult& r_eig, std::size_t k,
                                       double rank_rel_tol = 1e-12);

/// Thin SVD with ‖M − U·diag(s)·Vᵀ‖_F ≤ 1e-9 · (1 + ‖M‖_F).
SvdResult svd(const Matrix& m);

/// Singular value thresholding: U·max(Σ−τ, 0)·Vᵀ, the proximal operator of τ‖·‖_*.
/// When nuclear_norm_out is non-null it receives Σ max(σ−τ, 0), the nuclear norm
/// of the returned matrix.
Matrix svt(const Matrix& m, double tau, double* nuclear_norm_out = nullptr);

/// Elementwise soft shrinkage sign(x)·max(|x|−τ, 0), the proximal operator of τ‖·‖₁.
Matrix shrink(const Matrix& m, double tau);

/// Solve a·X = b for symmetric (possibly indefinite) a. Throws NumericError when
/// the factorization detects numerical singularity.
Matrix solve_sym(const Matrix& a, const Matrix& b);

/// Solve a·X = b for symmetric positive definite a via Cholesky.
Matrix solve_spd(const Matrix& a, const Matrix& b);

}  // namespace rsacdda
