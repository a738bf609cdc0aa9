#pragma once

#include <vector>

#include "rsacdda/matrix.hpp"

namespace rsacdda {

struct Prediction {
  std::vector<int> labels;
  /// Negative Euclidean distance to the nearest training sample.
  std::vector<double> confidence;
};

/// 1-nearest-neighbour with Euclidean metric; ties broken by lowest training
/// index so results are deterministic and independent of scoring order.
Prediction nn_classify(const Matrix& train_features, const std::vector<int>& train_labels,
                       const Matrix& query_features);

/// Fraction of exact label matches.
double accuracy(const std::vector<int>& predicted, const std::vector<int>& truth);

}  // namespace rsacdda
