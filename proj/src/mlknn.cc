#include "fmlfs/mlknn.h"

#include <algorithm>
#include <numeric>
#include <string>

#include "fmlfs/error.h"

namespace fmlfs {
namespace {

std::vector<double> Normalize(const MlknnModel& model, std::span<const double> row) {
  std::vector<double> out(row.size());
  for (std::size_t f = 0; f < row.size(); ++f) {
    out[f] = (row[f] - model.feature_min[f]) * model.feature_scale[f];
  }
  return out;
}

std::vector<std::size_t> LabelCounts(const Matrix<std::uint8_t>& labels,
                                     std::span<const std::size_t> neighbors) {
  std::vector<std::size_t> counts(labels.cols(), 0);
  for (std::size_t n : neighbors) {
    for (std::size_t l = 0; l < labels.cols(); ++l) counts[l] += labels(n, l);
  }
  return counts;
}

}  // namespace

std::vector<std::size_t> NearestNeighbors(const Matrix<double>& reference,
                                          std::span<const double> query,
                                          std::size_t k, std::size_t exclude) {
  std::vector<std::pair<double, std::size_t>> dist;
  dist.reserve(reference.rows());
  for (std::size_t r = 0; r < reference.rows(); ++r) {
    if (r == exclude) continue;
    const auto row = reference.row(r);
    double sq = 0;
    for (std::size_t f = 0; f < row.size(); ++f) {
      const double diff = row[f] - query[f];
      sq += diff * diff;
    }
    dist.emplace_back(sq, r);
  }
  k = std::min(k, dist.size());
  std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k),
                    dist.end());
  std::vector<std::size_t> out(k);
  for (std::size_t i = 0; i < k; ++i) out[i] = dist[i].second;
  return out;
}

MlknnModel FitMlknn(const MultiLabelDataset& train, std::size_t k, double smoothing) {
  const std::size_t n = train.num_instances();
  const std::size_t d = train.num_features();
  const std::size_t l = train.num_labels();
  if (k < 1) throw InvalidArgument("k must be at least 1");
  if (!(smoothing > 0)) throw InvalidArgument("smoothing must be positive");
  if (n <= k) {
    throw InvalidArgument("ML-kNN needs more than k=" + std::to_string(k) +
                          " training instances, got " + std::to_string(n));
  }

  MlknnModel model;
  model.k = k;
  model.smoothing = smoothing;
  model.feature_min.assign(d, 0.0);
  model.feature_scale.assign(d, 0.0);
  for (std::size_t f = 0; f < d; ++f) {
    double lo = train.features(0, f);
    double hi = lo;
    for (std::size_t r = 1; r < n; ++r) {
      lo = std::min(lo, train.features(r, f));
      hi = std::max(hi, train.features(r, f));
    }
    model.feature_min[f] = lo;
    model.feature_scale[f] = hi > lo ? 1.0 / (hi - lo) : 0.0;
  }
  model.train_features = Matrix<double>(n, d);
  for (std::size_t r = 0; r < n; ++r) {
    const std::vector<double> norm = Normalize(model, train.features.row(r));
    std::ranges::copy(norm, model.train_features.row(r).begin());
  }
  model.train_labels = train.labels;

  const double s = smoothing;
  model.prior.resize(l);
  for (std::size_t j = 0; j < l; ++j) {
    double positives = 0;
    for (std::size_t r = 0; r < n; ++r) positives += train.labels(r, j);
    model.prior[j] = (s + positives) / (2 * s + static_cast<double>(n));
  }

  // hist_true(l, c): rows with label l whose k neighbours hold l exactly c
  // times; hist_false likewise for rows without l.
  Matrix<double> hist_true(l, k + 1, 0.0);
  Matrix<double> hist_false(l, k + 1, 0.0);
  for (std::size_t r = 0; r < n; ++r) {
    const auto neighbors =
        NearestNeighbors(model.train_features, model.train_features.row(r), k, r);
    const auto counts = LabelCounts(model.train_labels, neighbors);
    for (std::size_t j = 0; j < l; ++j) {
      if (train.labels(r, j)) {
        hist_true(j, counts[j]) += 1;
      } else {
        hist_false(j, counts[j]) += 1;
      }
    }
  }
  model.posterior_true = Matrix<double>(l, k + 1);
  model.posterior_false = Matrix<double>(l, k + 1);
  const double denom_s = s * static_cast<double>(k + 1);
  for (std::size_t j = 0; j < l; ++j) {
    const auto ht = hist_true.row(j);
    const auto hf = hist_false.row(j);
    const double total_true = std::accumulate(ht.begin(), ht.end(), 0.0);
    const double total_false = std::accumulate(hf.begin(), hf.end(), 0.0);
    for (std::size_t c = 0; c <= k; ++c) {
      model.posterior_true(j, c) = (s + ht[c]) / (denom_s + total_true);
      model.posterior_false(j, c) = (s + hf[c]) / (denom_s + total_false);
    }
  }
  return model;
}

PredictionSet PredictMlknn(const MlknnModel& model, const MultiLabelDataset& test) {
  if (test.num_features() != model.num_features()) {
    throw InvalidArgument("test set has " + std::to_string(test.num_features()) +
                          " features, model expects " +
                          std::to_string(model.num_features()));
  }
  const std::size_t n = test.num_instances();
  const std::size_t l = model.num_labels();
  PredictionSet out{Matrix<std::uint8_t>(n, l), Matrix<double>(n, l)};
  for (std::size_t r = 0; r < n; ++r) {
    const std::vector<double> query = Normalize(model, test.features.row(r));
    const auto neighbors = NearestNeighbors(model.train_features, query, model.k);
    const auto counts = LabelCounts(model.train_labels, neighbors);
    for (std::size_t j = 0; j < l; ++j) {
      const double yes = model.prior[j] * model.posterior_true(j, counts[j]);
      const double no = (1.0 - model.prior[j]) * model.posterior_false(j, counts[j]);
      out.labels(r, j) = yes > no ? 1 : 0;
      out.scores(r, j) = yes / (yes + no);
    }
  }
  return out;
}

}  // namespace fmlfs
