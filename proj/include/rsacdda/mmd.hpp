#pragma once

#include <optional>
#include <string>
#include <vector>

#include "rsacdda/dataset.hpp"
#include "rsacdda/matrix.hpp"

namespace rsacdda {

/// Every MMD coefficient matrix over the joint sample order [source | target],
/// n = ns + nt. Skipped classes (empty on one side) leave a zero matrix in `mc`
/// and are listed in `skipped_classes`.
struct MmdSet {
  Matrix m0;                // marginal term
  std::vector<Matrix> mc;   // one per class, zero where skipped
  Matrix m_rep;             // repulsive sum over classes
  Matrix m_c_total;         // m0 + Σ mc
  Matrix m_rsa;             // m_c_total − m_rep
  std::vector<int> skipped_classes;       // classes whose Mc was skipped
  std::vector<std::string> skip_report;   // per-term skips in the repulsive build
};

/// Rank-one factorization M_RSA = Σ_j signs[j] · u_j u_jᵀ with u_j the columns
/// of `u`. The pipeline hot path uses this instead of the n×n matrices; it is
/// equivalence-tested against assemble_mmd.
struct MmdFactor {
  Matrix u;                   // n × p
  std::vector<double> signs;  // +1 alignment terms, −1 repulsive terms
  std::vector<int> skipped_classes;
  std::vector<std::string> skip_report;
};

/// Marginal-distribution coefficient matrix: 1/ns² on the source block, 1/nt²
/// on the target block, −1/(ns·nt) on the cross blocks. Every row sums to zero.
Matrix build_m0(std::size_t ns, std::size_t nt);

/// Class-conditional coefficient matrix for class c, or nullopt when the class
/// is empty on either side (the caller must skip, not substitute zeros).
std::optional<Matrix> build_mc(const SubDomainIndex& idx, int c);

struct RepulsiveResult {
  Matrix matrix;
  std::vector<std::string> skips;
};

/// Sum over classes of the three repulsive coefficient matrices. For each class
/// the "other side" is the pooled complement (all samples of every other
/// class), whose cardinality is the normalizer. Degenerate terms are skipped
/// and reported.
RepulsiveResult build_repulsive(const SubDomainIndex& idx);

MmdSet assemble_mmd(const SubDomainIndex& idx);
MmdFactor build_mmd_factor(const SubDomainIndex& idx);

/// Materialize Σ signs[j]·u_j u_jᵀ as a dense n×n matrix.
Matrix mmd_factor_to_matrix(const MmdFactor& f);
/// ‖M‖_F of the factored matrix without materializing it.
double mmd_factor_frobenius(const MmdFactor& f);

struct MmdDistances {
  double marginal = 0.0;
  double conditional = 0.0;
  double repulsive = 0.0;
};

/// The independent test oracle: the three distances computed literally from
/// per-class mean differences of the projected samples, with no coefficient
/// matrices. a_matrix is m×k; pass identity for raw-space distances.
MmdDistances mmd_distance_oracle(const DomainPair& pair, const std::vector<int>& pseudo,
                                 const Matrix& a_matrix);

}  // namespace rsacdda
