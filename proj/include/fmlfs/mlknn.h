#ifndef FMLFS_MLKNN_H_
#define FMLFS_MLKNN_H_

#include <cstdint>
#include <vector>

#include "fmlfs/dataset.h"
#include "fmlfs/matrix.h"

namespace fmlfs {

// Multi-label k-nearest-neighbour classifier with per-label MAP decisions
// from neighbour label counts. Distances are Euclidean over min-max
// normalized features.
struct MlknnModel {
  std::size_t k = 10;
  double smoothing = 1.0;
  std::vector<double> feature_min;
  std::vector<double> feature_scale;  // 1 / (max - min), or 0 for constants
  Matrix<double> train_features;      // normalized, n_train x D
  Matrix<std::uint8_t> train_labels;  // n_train x L
  std::vector<double> prior;          // P(H1) per label
  // P(count = j | H1) and P(count = j | H0), L x (k + 1).
  Matrix<double> posterior_true;
  Matrix<double> posterior_false;

  std::size_t num_features() const { return feature_min.size(); }
  std::size_t num_labels() const { return prior.size(); }
};

struct PredictionSet {
  Matrix<std::uint8_t> labels;  // n x L, 1 where the MAP rule says present
  Matrix<double> scores;        // n x L posterior P(H1 | count)
};

MlknnModel FitMlknn(const MultiLabelDataset& train, std::size_t k = 10,
                    double smoothing = 1.0);

PredictionSet PredictMlknn(const MlknnModel& model, const MultiLabelDataset& test);

// Indices of the k nearest rows of `reference` to `query` (already
// normalized), nearest first, ties by ascending row index. `exclude` is
// skipped, which is how a training row avoids being its own neighbour.
std::vector<std::size_t> NearestNeighbors(const Matrix<double>& reference,
                                          std::span<const double> query,
                                          std::size_t k,
                                          std::size_t exclude = SIZE_MAX);

}  // namespace fmlfs

#endif  // FMLFS_MLKNN_H_
