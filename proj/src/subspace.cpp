#include "rsacdda/subspace.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "rsacdda/classify.hpp"
#include "rsacdda/errors.hpp"
#include "rsacdda/kernels.hpp"
#include "rsacdda/linalg.hpp"

namespace rsacdda {
namespace {

// X with the mean sample removed from every column, i.e. X·H without forming H.
Matrix center_columns(const Matrix& x) {
  Matrix xc = x;
  const std::size_t m = x.rows();
  const std::size_t n = x.cols();
  std::vector<double> mean(m, 0.0);
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t i = 0; i < m; ++i) mean[i] += x(i, j);
  for (std::size_t i = 0; i < m; ++i) mean[i] /= static_cast<double>(n);
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t i = 0; i < m; ++i) xc(i, j) -= mean[i];
  return xc;
}

PcaResult pca_from_scatter(const Matrix& x_all, std::size_t k, bool clip_to_rank,
                           std::size_t* k_used) {
  const std::size_t m = x_all.rows();
  const std::size_t n = x_all.cols();
  if (n < 2) throw DataError("pca_embed: need at least two samples");
  const std::size_t k_max = std::min(m, n - 1);
  if (k < 1 || k > k_max)
    throw DataError("pca_embed: k must lie in 1..min(m, n-1) = 1.." +
                    std::to_string(k_max));

  const Matrix xc = center_columns(x_all);
  const Matrix scatter = symmetrize(matmul_nt(xc, xc));
  const SymEigResult eig = sym_eig(scatter);  // ascending

  const double lam_max = std::max(eig.values.back(), 0.0);
  std::size_t rank = 0;
  for (double v : eig.values)
    if (v > 1e-12 * lam_max && v > 0.0) ++rank;
  if (rank == 0) throw DataError("pca_embed: data has zero variance (rank 0)");
  if (k > rank) {
    if (!clip_to_rank)
      throw DataError("pca_embed: k=" + std::to_string(k) +
                      " exceeds numerical rank " + std::to_string(rank));
    k = rank;
  }
  if (k_used != nullptr) *k_used = k;

  PcaResult out;
  out.a = Matrix(m, k);
  out.values.resize(k);
  for (std::size_t j = 0; j < k; ++j) {
    const std::size_t src = m - 1 - j;  // descending eigenvalue order
    out.values[j] = eig.values[src];
    for (std::size_t i = 0; i < m; ++i) out.a(i, j) = eig.vectors(i, src);
  }
  out.z = matmul_tn(out.a, x_all);
  return out;
}

}  // namespace

Matrix centering_matrix(std::size_t n) {
  if (n < 1) throw DataError("centering_matrix: n must be >= 1");
  Matrix h(n, n);
  const double off = -1.0 / static_cast<double>(n);
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t i = 0; i < n; ++i) h(i, j) = (i == j) ? 1.0 + off : off;
  return h;
}

PcaResult pca_embed(const Matrix& x_all, std::size_t k) {
  return pca_from_scatter(x_all, k, false, nullptr);
}

PcaResult pca_embed_up_to(const Matrix& x_all, std::size_t k, std::size_t* k_used) {
  return pca_from_scatter(x_all, k, true, k_used);
}

InitResult run_algorithm_1a(const DomainPair& pair, const AdaptationConfig& cfg) {
  cfg.validate();
  const std::size_t m = pair.source.feature_dim();
  const std::size_t ns = pair.source.sample_count();
  const std::size_t nt = pair.target.sample_count();
  const std::size_t n = ns + nt;
  if (cfg.k_init > m)
    throw ConfigError("run_algorithm_1a: k_init exceeds feature dimension");

  Matrix x(m, n);
  for (std::size_t j = 0; j < ns; ++j)
    for (std::size_t i = 0; i < m; ++i) x(i, j) = pair.source.features(i, j);
  for (std::size_t j = 0; j < nt; ++j)
    for (std::size_t i = 0; i < m; ++i) x(i, ns + j) = pair.target.features(i, j);

  const Matrix xc = center_columns(x);
  const Matrix scatter = symmetrize(matmul_nt(xc, xc));  // X·H·Xᵀ

  InitResult out;

  // Bootstrap: 1-NN in the PCA embedding supplies the first pseudo-labels.
  std::size_t k = std::min(cfg.k_init, std::min(m, n - 1));
  const PcaResult pca = pca_embed_up_to(x, k, &k);
  out.k_used = k;
  {
    Matrix zs(k, ns), zt(k, nt);
    for (std::size_t j = 0; j < ns; ++j)
      for (std::size_t i = 0; i < k; ++i) zs(i, j) = pca.z(i, j);
    for (std::size_t j = 0; j < nt; ++j)
      for (std::size_t i = 0; i < k; ++i) zt(i, j) = pca.z(i, ns + j);
    out.pseudo_labels = nn_classify(zs, pair.source.labels, zt).labels;
  }

  auto record = [&](int iteration, int skipped) {
    InitIterationRecord rec;
    rec.iteration = iteration;
    rec.skipped_classes = skipped;
    if (pair.target.has_labels()) {
      rec.target_accuracy = accuracy(out.pseudo_labels, pair.target.labels);
      rec.accuracy_known = true;
    }
    out.trace.push_back(rec);
  };
  record(0, 0);

  auto build_pencil_left = [&](const MmdFactor& f) {
    Matrix g = matmul(x, f.u);  // m×p
    Matrix gs = g;
    double scale = 1.0;
    if (cfg.normalize_mmd) {
      const double fro = mmd_factor_frobenius(f);
      if (fro > 0.0) scale = 1.0 / fro;
    }
    for (std::size_t j = 0; j < gs.cols(); ++j)
      kernels::active().scale(scale * f.signs[j], gs.col(j), gs.rows());
    Matrix l = symmetrize(matmul_nt(gs, g));
    for (std::size_t i = 0; i < m; ++i) l(i, i) += cfg.lambda;
    return l;
  };

  // The centered scatter is rank-deficient by construction (centering, and
  // low-rank inputs generally), so the pencil is solved deflated to its range.
  const SymEigResult scatter_eig = sym_eig(scatter);
  auto solve_pencil = [&](const Matrix& l) {
    return gen_eig_smallest_deflated(l, scatter, scatter_eig, k);
  };

  Matrix a_mmd;
  for (std::size_t t = 1; t <= cfg.iterations_T; ++t) {
    const SubDomainIndex idx = index_subdomains(pair, out.pseudo_labels);
    const MmdFactor factor = build_mmd_factor(idx);
    const GenEigResult eig = solve_pencil(build_pencil_left(factor));
    a_mmd = eig.vectors;

    const Matrix d_mmd = matmul_tn(a_mmd, x);  // k×n
    Matrix ds(k, ns), dt(k, nt);
    for (std::size_t j = 0; j < ns; ++j)
      for (std::size_t i = 0; i < k; ++i) ds(i, j) = d_mmd(i, j);
    for (std::size_t j = 0; j < nt; ++j)
      for (std::size_t i = 0; i < k; ++i) dt(i, j) = d_mmd(i, ns + j);
    out.pseudo_labels = nn_classify(ds, pair.source.labels, dt).labels;
    record(static_cast<int>(t), static_cast<int>(factor.skipped_classes.size()));
  }

  // Outputs are made self-consistent: M_RSA from the final labels, A from one
  // final solve against it, so the pencil residual contract holds for the pair
  // actually returned.
  const SubDomainIndex idx = index_subdomains(pair, out.pseudo_labels);
  const MmdFactor factor = build_mmd_factor(idx);
  const GenEigResult eig = solve_pencil(build_pencil_left(factor));
  out.a_mmd = eig.vectors;
  out.k_used = out.a_mmd.cols();
  out.m_rsa = mmd_factor_to_matrix(factor);
  if (cfg.normalize_mmd) {
    const double fro = frobenius_norm(out.m_rsa);
    if (fro > 0.0) out.m_rsa *= 1.0 / fro;
  }
  return out;
}

}  // namespace rsacdda
