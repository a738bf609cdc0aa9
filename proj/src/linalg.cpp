#include "rsacdda/linalg.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <string>

#include "rsacdda/errors.hpp"
#include "rsacdda/kernels.hpp"

namespace rsacdda {
namespace {

using EigenMap = Eigen::Map<const Eigen::MatrixXd>;

EigenMap map_of(const Matrix& m) {
  return EigenMap(m.data(), static_cast<Eigen::Index>(m.rows()),
                  static_cast<Eigen::Index>(m.cols()));
}

Matrix from_eigen(const Eigen::MatrixXd& e) {
  Matrix m(static_cast<std::size_t>(e.rows()), static_cast<std::size_t>(e.cols()));
  Eigen::Map<Eigen::MatrixXd>(m.data(), e.rows(), e.cols()) = e;
  return m;
}

void require_finite(const Matrix& m, const char* what) {
  if (!m.all_finite()) throw NumericError(std::string(what) + ": non-finite input");
}

void require_symmetric(const Matrix& m, const char* what) {
  if (m.rows() != m.cols()) throw NumericError(std::string(what) + ": matrix not square");
  const double scale = 1.0 + max_abs(m);
  for (std::size_t j = 0; j < m.cols(); ++j)
    for (std::size_t i = j + 1; i < m.rows(); ++i)
      if (std::fabs(m(i, j) - m(j, i)) > 1e-10 * scale)
        throw NumericError(std::string(what) + ": matrix not symmetric within tolerance");
}

// Deterministic sign convention: first component whose magnitude exceeds
// 1e-12·‖col‖_∞ is made positive.
void fix_column_signs(Matrix& m, Matrix* coupled = nullptr) {
  for (std::size_t j = 0; j < m.cols(); ++j) {
    double peak = 0.0;
    for (std::size_t i = 0; i < m.rows(); ++i) peak = std::max(peak, std::fabs(m(i, j)));
    const double tol = 1e-12 * peak;
    double lead = 0.0;
    for (std::size_t i = 0; i < m.rows(); ++i) {
      if (std::fabs(m(i, j)) > tol) {
        lead = m(i, j);
        break;
      }
    }
    if (lead < 0.0) {
      for (std::size_t i = 0; i < m.rows(); ++i) m(i, j) = -m(i, j);
      if (coupled != nullptr)
        for (std::size_t i = 0; i < coupled->rows(); ++i) (*coupled)(i, j) = -(*coupled)(i, j);
    }
  }
}

}  // namespace

GenEigResult gen_eig_smallest(const Matrix& l_matrix, const Matrix& r_matrix,
                              std::size_t k, double ridge) {
  require_finite(l_matrix, "gen_eig_smallest");
  require_finite(r_matrix, "gen_eig_smallest");
  require_symmetric(l_matrix, "gen_eig_smallest(l)");
  require_symmetric(r_matrix, "gen_eig_smallest(r)");
  if (l_matrix.rows() != r_matrix.rows())
    throw NumericError("gen_eig_smallest: pencil dimension mismatch");
  const std::size_t m = l_matrix.rows();
  if (k < 1 || k > m) throw NumericError("gen_eig_smallest: k out of range");
  if (ridge < 0.0) throw NumericError("gen_eig_smallest: negative ridge");

  Eigen::MatrixXd r_ridged = map_of(r_matrix);
  if (ridge > 0.0) r_ridged.diagonal().array() += ridge;

  // The pencil solve reduces through a Cholesky of the right matrix; probe it
  // first so singularity surfaces as a clean error instead of garbage output.
  Eigen::LLT<Eigen::MatrixXd> llt(r_ridged);
  if (llt.info() != Eigen::Success)
    throw NumericError(
        "gen_eig_smallest: right matrix not positive definite; increase ridge");

  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> solver(
      map_of(l_matrix), r_ridged, Eigen::ComputeEigenvectors | Eigen::Ax_lBx);
  if (solver.info() != Eigen::Success)
    throw NumericError("gen_eig_smallest: eigensolver failed to converge; increase ridge");

  GenEigResult out;
  out.values.assign(solver.eigenvalues().data(), solver.eigenvalues().data() + k);
  out.vectors = from_eigen(solver.eigenvectors().leftCols(static_cast<Eigen::Index>(k)));
  fix_column_signs(out.vectors);

  const EigenMap lm = map_of(l_matrix);
  const Eigen::Map<const Eigen::MatrixXd> vm(out.vectors.data(),
                                             static_cast<Eigen::Index>(m),
                                             static_cast<Eigen::Index>(k));
  const Eigen::Map<const Eigen::VectorXd> lam(out.values.data(),
                                              static_cast<Eigen::Index>(k));
  out.residual = (lm * vm - r_ridged * vm * lam.asDiagonal()).norm();
  const double bound =
      1e-8 * (1.0 + frobenius_norm(l_matrix) + frobenius_norm(r_matrix));
  if (!(out.residual <= bound))
    throw NumericError("gen_eig_smallest: residual " + std::to_string(out.residual) +
                       " exceeds contract; pencil ill-conditioned, increase ridge");
  return out;
}

GenEigResult gen_eig_smallest_deflated(const Matrix& l_matrix, const Matrix& r_matrix,
                                       const SymEigResult& r_eig, std::size_t k,
                                       double rank_rel_tol) {
  require_finite(l_matrix, "gen_eig_smallest_deflated");
  require_symmetric(l_matrix, "gen_eig_smallest_deflated(l)");
  const std::size_t m = l_matrix.rows();
  if (r_eig.vectors.rows() != m || r_eig.values.size() != m)
    throw NumericError("gen_eig_smallest_deflated: eigendecomposition size mismatch");
  if (k < 1) throw NumericError("gen_eig_smallest_deflated: k out of range");

  const double lam_max = std::max(r_eig.values.back(), 0.0);
  if (lam_max <= 0.0)
    throw NumericError("gen_eig_smallest_deflated: right matrix has no positive spectrum");
  std::size_t rank = 0;
  for (double v : r_eig.values)
    if (v > rank_rel_tol * lam_max) ++rank;
  const std::size_t kk = std::min(k, rank);

  // Basis of range(r): the top `rank` eigenvectors, scaled by λ^{-1/2} so the
  // reduced pencil becomes a standard symmetric problem.
  Matrix basis(m, rank);
  for (std::size_t j = 0; j < rank; ++j) {
    const std::size_t src = m - rank + j;
    const double inv_sqrt = 1.0 / std::sqrt(r_eig.values[src]);
    for (std::size_t i = 0; i < m; ++i) basis(i, j) = r_eig.vectors(i, src) * inv_sqrt;
  }
  const Matrix reduced = symmetrize(matmul_tn(basis, matmul(l_matrix, basis)));
  const SymEigResult inner_eig = sym_eig(reduced);

  GenEigResult out;
  out.values.assign(inner_eig.values.begin(),
                    inner_eig.values.begin() + static_cast<std::ptrdiff_t>(kk));
  Matrix y(rank, kk);
  for (std::size_t j = 0; j < kk; ++j)
    for (std::size_t i = 0; i < rank; ++i) y(i, j) = inner_eig.vectors(i, j);
  out.vectors = matmul(basis, y);
  fix_column_signs(out.vectors);

  const EigenMap lm = map_of(l_matrix);
  const EigenMap rm = map_of(r_matrix);
  const Eigen::Map<const Eigen::MatrixXd> vm(out.vectors.data(),
                                             static_cast<Eigen::Index>(m),
                                             static_cast<Eigen::Index>(kk));
  const Eigen::Map<const Eigen::VectorXd> lam(out.values.data(),
                                              static_cast<Eigen::Index>(kk));
  const Eigen::MatrixXd full_residual = lm * vm - rm * vm * lam.asDiagonal();
  out.residual = full_residual.norm();

  // The contract covers the problem actually solved: the pencil restricted to
  // range(r). When l maps that range into itself (every pencil built from
  // zero-sum low-rank terms does) the full residual matches it; callers who
  // rely on that stronger property assert out.residual themselves.
  const EigenMap evec = map_of(r_eig.vectors);
  const double range_residual =
      (evec.rightCols(static_cast<Eigen::Index>(rank)).transpose() * full_residual)
          .norm();
  const double bound =
      1e-8 * (1.0 + frobenius_norm(l_matrix) + frobenius_norm(r_matrix));
  if (!(range_residual <= bound))
    throw NumericError("gen_eig_smallest_deflated: range residual " +
                       std::to_string(range_residual) + " exceeds contract");
  return out;
}

SymEigResult sym_eig(const Matrix& a) {
  require_finite(a, "sym_eig");
  require_symmetric(a, "sym_eig");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(map_of(a));
  if (solver.info() != Eigen::Success)
    throw NumericError("sym_eig: eigensolver failed to converge");
  SymEigResult out;
  out.values.assign(solver.eigenvalues().data(),
                    solver.eigenvalues().data() + solver.eigenvalues().size());
  out.vectors = from_eigen(solver.eigenvectors());
  fix_column_signs(out.vectors);
  return out;
}

SvdResult svd(const Matrix& m) {
  require_finite(m, "svd");
  const auto r = static_cast<Eigen::Index>(std::min(m.rows(), m.cols()));
  Eigen::BDCSVD<Eigen::MatrixXd> solver(map_of(m),
                                        Eigen::ComputeThinU | Eigen::ComputeThinV);
  SvdResult out;
  out.s.assign(solver.singularValues().data(), solver.singularValues().data() + r);
  out.u = from_eigen(solver.matrixU());
  out.v = from_eigen(solver.matrixV());
  fix_column_signs(out.u, &out.v);
  return out;
}

Matrix svt(const Matrix& m, double tau, double* nuclear_norm_out) {
  if (tau < 0.0) throw NumericError("svt: negative tau");
  SvdResult f = svd(m);
  // Columns whose singular value shrinks to zero contribute nothing; drop them.
  std::size_t keep = 0;
  double nuclear = 0.0;
  while (keep < f.s.size() && f.s[keep] > tau) {
    nuclear += f.s[keep] - tau;
    ++keep;
  }
  if (nuclear_norm_out != nullptr) *nuclear_norm_out = nuclear;
  if (keep == 0) return Matrix(m.rows(), m.cols());
  Matrix us(m.rows(), keep);
  Matrix vk(m.cols(), keep);
  for (std::size_t j = 0; j < keep; ++j) {
    const double sj = f.s[j] - tau;
    for (std::size_t i = 0; i < m.rows(); ++i) us(i, j) = sj * f.u(i, j);
    for (std::size_t i = 0; i < m.cols(); ++i) vk(i, j) = f.v(i, j);
  }
  return matmul_nt(us, vk);
}

Matrix shrink(const Matrix& m, double tau) {
  if (tau < 0.0) throw NumericError("shrink: negative tau");
  require_finite(m, "shrink");
  Matrix out(m.rows(), m.cols());
  kernels::active().soft_threshold(m.data(), tau, out.data(), m.size());
  return out;
}

Matrix solve_sym(const Matrix& a, const Matrix& b) {
  require_finite(a, "solve_sym");
  if (a.rows() != a.cols() || a.rows() != b.rows())
    throw NumericError("solve_sym: shape mismatch");
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(map_of(a));
  const Eigen::VectorXd diag = lu.matrixLU().diagonal().cwiseAbs();
  const double dmax = diag.maxCoeff();
  if (dmax <= 0.0 || diag.minCoeff() < 1e-14 * dmax)
    throw NumericError("solve_sym: matrix numerically singular");
  return from_eigen(lu.solve(map_of(b)));
}

Matrix solve_spd(const Matrix& a, const Matrix& b) {
  require_finite(a, "solve_spd");
  if (a.rows() != a.cols() || a.rows() != b.rows())
    throw NumericError("solve_spd: shape mismatch");
  Eigen::LLT<Eigen::MatrixXd> llt(map_of(a));
  if (llt.info() != Eigen::Success)
    throw NumericError("solve_spd: matrix not positive definite");
  return from_eigen(llt.solve(map_of(b)));
}

}  // namespace rsacdda
