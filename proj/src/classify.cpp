#include "rsacdda/classify.hpp"

#include <cmath>
#include <limits>

#include "rsacdda/errors.hpp"
#include "rsacdda/kernels.hpp"

namespace rsacdda {

Prediction nn_classify(const Matrix& train_features, const std::vector<int>& train_labels,
                       const Matrix& query_features) {
  if (train_features.cols() == 0) throw DataError("nn_classify: empty training set");
  if (train_labels.size() != train_features.cols())
    throw DataError("nn_classify: label count does not match training samples");
  if (train_features.rows() != query_features.rows())
    throw DataError("nn_classify: train/query feature dimensions differ");

  const auto& k = kernels::active();
  const std::size_t dim = train_features.rows();
  Prediction out;
  out.labels.resize(query_features.cols());
  out.confidence.resize(query_features.cols());
  for (std::size_t q = 0; q < query_features.cols(); ++q) {
    double best = std::numeric_limits<double>::infinity();
    std::size_t best_idx = 0;
    for (std::size_t t = 0; t < train_features.cols(); ++t) {
      const double d = k.sq_dist(query_features.col(q), train_features.col(t), dim);
      if (d < best) {  // strict: equal distances keep the lower index
        best = d;
        best_idx = t;
      }
    }
    out.labels[q] = train_labels[best_idx];
    out.confidence[q] = -std::sqrt(best);
  }
  return out;
}

double accuracy(const std::vector<int>& predicted, const std::vector<int>& truth) {
  if (predicted.size() != truth.size()) throw DataError("accuracy: length mismatch");
  if (predicted.empty()) throw DataError("accuracy: empty vectors");
  std::size_t hits = 0;
  for (std::size_t i = 0; i < predicted.size(); ++i)
    if (predicted[i] == truth[i]) ++hits;
  return static_cast<double>(hits) / static_cast<double>(predicted.size());
}

}  // namespace rsacdda
