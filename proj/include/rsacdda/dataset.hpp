#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rsacdda/config.hpp"
#include "rsacdda/matrix.hpp"

namespace rsacdda {

/// A feature matrix (m features × n samples, samples as columns) plus optional
/// 1-based integer labels. Immutable after construction via make_dataset.
struct Dataset {
  Matrix features;
  std::vector<int> labels;  // empty when absent

  std::size_t feature_dim() const { return features.rows(); }
  std::size_t sample_count() const { return features.cols(); }
  bool has_labels() const { return !labels.empty(); }
  /// Highest label value; 0 when unlabeled.
  int class_count() const;
};

/// Validates invariants: finite features, m ≥ 1, n ≥ 1, and when labels are
/// present every value in 1..C with every class 1..C occupied.
Dataset make_dataset(Matrix features, std::vector<int> labels = {});

/// Source (labeled) and target (labels optional, evaluation only) over a shared
/// feature space.
struct DomainPair {
  Dataset source;
  Dataset target;
  int class_count = 0;
};

DomainPair make_domain_pair(Dataset source, Dataset target);

/// Per-class sample index lists for one pseudo-labeling of the target. Classes
/// may be empty on either side; consumers must check.
struct SubDomainIndex {
  int class_count = 0;
  std::size_t ns = 0;
  std::size_t nt = 0;
  /// source_by_class[c-1] lists source sample indices with label c; target
  /// indices are relative to the target matrix (not offset by ns).
  std::vector<std::vector<std::size_t>> source_by_class;
  std::vector<std::vector<std::size_t>> target_by_class;

  std::size_t source_count(int c) const { return source_by_class[c - 1].size(); }
  std::size_t target_count(int c) const { return target_by_class[c - 1].size(); }
};

SubDomainIndex index_subdomains(const DomainPair& pair,
                                const std::vector<int>& target_pseudo);

enum class FileFormat { csv, binary_matrix };

Dataset load_dataset(const std::string& path, FileFormat format);
void write_dataset(const std::string& path, const Dataset& d, FileFormat format);

/// Plain-text label file: one integer per line.
std::vector<int> load_labels(const std::string& path);

Dataset normalize(const Dataset& d, NormalizeMode mode);

/// Deterministic desk-scale DA task: class blobs in a latent 2-D plane embedded
/// into 20-D by a seed-fixed random orthonormal map; the target blobs are
/// rotated by rotation_deg in the latent plane. Target labels are retained for
/// evaluation only.
DomainPair make_synthetic_pair(std::uint64_t seed, int n_per_class, int class_count,
                               double rotation_deg, double noise_sd);

}  // namespace rsacdda
