#include "fmlfs/metrics.h"

#include <algorithm>
#include <numeric>

#include "fmlfs/error.h"

namespace fmlfs {

std::vector<std::size_t> LabelRanks(std::span<const double> scores) {
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::ranges::stable_sort(order, [&](std::size_t a, std::size_t b) {
    return scores[a] > scores[b];
  });
  std::vector<std::size_t> rank(scores.size());
  for (std::size_t pos = 0; pos < order.size(); ++pos) rank[order[pos]] = pos + 1;
  return rank;
}

namespace {

double MeanOrZero(double sum, std::size_t count) {
  return count == 0 ? 0.0 : sum / static_cast<double>(count);
}

}  // namespace

MetricsReport Evaluate(const Matrix<std::uint8_t>& actual,
                       const PredictionSet& predictions) {
  const std::size_t n = actual.rows();
  const std::size_t l = actual.cols();
  if (n == 0) throw InvalidArgument("cannot evaluate zero instances");
  if (predictions.labels.rows() != n || predictions.scores.rows() != n) {
    throw InvalidArgument("prediction and ground-truth instance counts differ");
  }
  if (predictions.labels.cols() != l || predictions.scores.cols() != l) {
    throw InvalidArgument("prediction and ground-truth label counts differ");
  }

  MetricsReport m;
  double acc_sum = 0, prec_sum = 0, rec_sum = 0, hl_sum = 0;
  double rl_sum = 0, ap_sum = 0, cov_sum = 0;
  std::size_t with_actual = 0, with_predicted = 0, ranking_count = 0;

  for (std::size_t i = 0; i < n; ++i) {
    const auto y = actual.row(i);
    const auto z = predictions.labels.row(i);
    std::size_t inter = 0, uni = 0, ny = 0, nz = 0, sym = 0;
    for (std::size_t j = 0; j < l; ++j) {
      const bool a = y[j] != 0;
      const bool p = z[j] != 0;
      inter += a && p;
      uni += a || p;
      ny += a;
      nz += p;
      sym += a != p;
    }
    hl_sum += static_cast<double>(sym) / static_cast<double>(l);

    if (nz == 0) {
      ++m.skipped.empty_predicted;
    } else {
      prec_sum += static_cast<double>(inter) / static_cast<double>(nz);
      ++with_predicted;
    }
    if (ny == 0) {
      ++m.skipped.empty_actual;
      continue;
    }
    ++with_actual;
    acc_sum += static_cast<double>(inter) / static_cast<double>(uni);
    rec_sum += static_cast<double>(inter) / static_cast<double>(ny);

    const std::vector<std::size_t> rank = LabelRanks(predictions.scores.row(i));
    std::size_t worst = 0;
    long double ap = 0;  // extended precision keeps small rationals exact
    for (std::size_t a = 0; a < l; ++a) {
      if (!y[a]) continue;
      worst = std::max(worst, rank[a]);
      std::size_t above = 0;
      for (std::size_t b = 0; b < l; ++b) above += y[b] && rank[b] <= rank[a];
      ap += static_cast<long double>(above) / static_cast<long double>(rank[a]);
    }
    ap_sum += static_cast<double>(ap / static_cast<long double>(ny));
    cov_sum += static_cast<double>(worst) - 1.0;

    if (ny == l) {
      ++m.skipped.full_actual;
      continue;
    }
    std::size_t misordered = 0;
    for (std::size_t a = 0; a < l; ++a) {
      if (!y[a]) continue;
      for (std::size_t b = 0; b < l; ++b) {
        if (!y[b] && rank[a] > rank[b]) ++misordered;
      }
    }
    rl_sum += static_cast<double>(misordered) /
              (static_cast<double>(ny) * static_cast<double>(l - ny));
    ++ranking_count;
  }

  m.accuracy = MeanOrZero(acc_sum, with_actual);
  m.precision = MeanOrZero(prec_sum, with_predicted);
  m.recall = MeanOrZero(rec_sum, with_actual);
  m.f_measure = m.precision + m.recall > 0
                    ? 2 * m.precision * m.recall / (m.precision + m.recall)
                    : 0.0;
  m.hamming_loss = hl_sum / static_cast<double>(n);
  m.ranking_loss = MeanOrZero(rl_sum, ranking_count);
  m.avg_precision = MeanOrZero(ap_sum, with_actual);
  m.coverage = MeanOrZero(cov_sum, with_actual);
  return m;
}

nlohmann::json ToJson(const MetricsReport& r) {
  return {{"accuracy", r.accuracy},
          {"f_measure", r.f_measure},
          {"hamming_loss", r.hamming_loss},
          {"ranking_loss", r.ranking_loss},
          {"avg_precision", r.avg_precision},
          {"coverage", r.coverage},
          {"precision", r.precision},
          {"recall", r.recall},
          {"skipped",
           {{"empty_actual", r.skipped.empty_actual},
            {"empty_predicted", r.skipped.empty_predicted},
            {"full_actual", r.skipped.full_actual}}}};
}

}  // namespace fmlfs
