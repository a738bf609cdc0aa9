#pragma once

#include <cstddef>
#include <vector>

#include "rsacdda/config.hpp"
#include "rsacdda/dataset.hpp"
#include "rsacdda/matrix.hpp"
#include "rsacdda/mmd.hpp"

namespace rsacdda {

/// H = I − (1/n)·ones: symmetric idempotent projector removing the mean.
Matrix centering_matrix(std::size_t n);

struct PcaResult {
  Matrix a;                    // m×k, orthonormal columns, top variance first
  Matrix z;                    // k×n embedded data, z = aᵀ·x
  std::vector<double> values;  // the k largest scatter eigenvalues, descending
};

/// Top-k principal directions of the column-centered scatter X·H·Xᵀ.
/// Requires 1 ≤ k ≤ min(m, n−1); throws when k exceeds the numerical rank,
/// naming the attainable rank.
PcaResult pca_embed(const Matrix& x_all, std::size_t k);

/// As pca_embed but clips k to the numerical rank instead of throwing; the
/// value actually used is reported through k_used.
PcaResult pca_embed_up_to(const Matrix& x_all, std::size_t k, std::size_t* k_used);

struct InitIterationRecord {
  int iteration = 0;  // 0 is the PCA bootstrap
  double target_accuracy = 0.0;
  bool accuracy_known = false;
  int skipped_classes = 0;
};

struct InitResult {
  Matrix m_rsa;                   // n×n, built from the final pseudo-labels
  Matrix a_mmd;                   // m×k, solved against that same m_rsa
  std::vector<int> pseudo_labels; // final pseudo-labels, 1..C
  std::vector<InitIterationRecord> trace;
  std::size_t k_used = 0;         // subspace width after rank clipping
};

/// The initial-MMD-matrix loop: bootstrap pseudo-labels by 1-NN in the PCA
/// embedding, then iterations_T rounds of {build M_RSA, solve the generalized
/// eigenproblem (X·M_RSA·Xᵀ + λI)·A = X·H·Xᵀ·A·Φ for the smallest pairs,
/// re-embed, refresh pseudo-labels}. The returned m_rsa/a_mmd pair is
/// self-consistent: m_rsa comes from the final labels and a_mmd from one
/// final solve against it.
InitResult run_algorithm_1a(const DomainPair& pair, const AdaptationConfig& cfg);

}  // namespace rsacdda
