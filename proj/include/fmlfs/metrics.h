#ifndef FMLFS_METRICS_H_
#define FMLFS_METRICS_H_

#include <cstdint>

#include "fmlfs/matrix.h"
#include "fmlfs/mlknn.h"
#include "json.hpp"

namespace fmlfs {

// Instances left out of a metric because its per-instance denominator is 0.
struct SkipCounts {
  std::size_t empty_actual = 0;     // |y_i| = 0: accuracy, recall, ranking
                                    // loss, average precision, coverage
  std::size_t empty_predicted = 0;  // |z_i| = 0: precision
  std::size_t full_actual = 0;      // |complement of y_i| = 0: ranking loss

  friend bool operator==(const SkipCounts&, const SkipCounts&) = default;
};

struct MetricsReport {
  double accuracy = 0;
  double precision = 0;
  double recall = 0;
  double f_measure = 0;
  double hamming_loss = 0;
  double ranking_loss = 0;
  double avg_precision = 0;
  double coverage = 0;
  SkipCounts skipped;
};

// Example-based multi-label metrics. Ranks come from the scores: rank 1 is
// the highest score, ties go to the lower label index.
MetricsReport Evaluate(const Matrix<std::uint8_t>& actual,
                       const PredictionSet& predictions);

// Rank (1-based) of every label for one instance.
std::vector<std::size_t> LabelRanks(std::span<const double> scores);

nlohmann::json ToJson(const MetricsReport& report);

}  // namespace fmlfs

#endif  // FMLFS_METRICS_H_
