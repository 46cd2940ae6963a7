#include "fmlfs/mlknn.h"

#include <algorithm>
#include <filesystem>
#include <numeric>
#include <random>

#include "fmlfs/error.h"
#include "fmlfs/metrics.h"
#include "gtest/gtest.h"
#include "oracles.h"

namespace fmlfs {
namespace {

const std::filesystem::path kDataDir = FMLFS_DATA_DIR;

// Textbook ML-kNN written from scratch: full distance table, stable sort,
// explicit per-label counting. Returns predicted label matrix.
Matrix<std::uint8_t> ReferenceMlknn(const MultiLabelDataset& train,
                                    const MultiLabelDataset& test, std::size_t k) {
  const std::size_t n = train.num_instances(), d = train.num_features(),
                    l = train.num_labels();
  std::vector<double> lo(d), hi(d);
  for (std::size_t f = 0; f < d; ++f) {
    const auto col = train.features.column(f);
    lo[f] = *std::ranges::min_element(col);
    hi[f] = *std::ranges::max_element(col);
  }
  const auto norm = [&](double v, std::size_t f) {
    return hi[f] > lo[f] ? (v - lo[f]) / (hi[f] - lo[f]) : 0.0;
  };
  const auto knn = [&](const MultiLabelDataset& src, std::size_t row, bool skip_self) {
    std::vector<std::size_t> idx;
    std::vector<double> dist(n);
    for (std::size_t t = 0; t < n; ++t) {
      double s = 0;
      for (std::size_t f = 0; f < d; ++f) {
        const double diff = norm(src.features(row, f), f) - norm(train.features(t, f), f);
        s += diff * diff;
      }
      dist[t] = s;
      if (!(skip_self && t == row)) idx.push_back(t);
    }
    std::ranges::stable_sort(idx, [&](std::size_t a, std::size_t b) { return dist[a] < dist[b]; });
    idx.resize(k);
    return idx;
  };
  std::vector<std::vector<double>> c_true(l, std::vector<double>(k + 1, 0));
  std::vector<std::vector<double>> c_false(l, std::vector<double>(k + 1, 0));
  std::vector<double> prior(l);
  for (std::size_t j = 0; j < l; ++j) {
    double pos = 0;
    for (std::size_t r = 0; r < n; ++r) pos += train.labels(r, j);
    prior[j] = (1 + pos) / (2 + static_cast<double>(n));
  }
  for (std::size_t r = 0; r < n; ++r) {
    const auto nb = knn(train, r, true);
    for (std::size_t j = 0; j < l; ++j) {
      std::size_t c = 0;
      for (auto t : nb) c += train.labels(t, j);
      (train.labels(r, j) ? c_true : c_false)[j][c] += 1;
    }
  }
  Matrix<std::uint8_t> out(test.num_instances(), l);
  for (std::size_t r = 0; r < test.num_instances(); ++r) {
    const auto nb = knn(test, r, false);
    for (std::size_t j = 0; j < l; ++j) {
      std::size_t c = 0;
      for (auto t : nb) c += train.labels(t, j);
      const double st = std::accumulate(c_true[j].begin(), c_true[j].end(), 0.0);
      const double sf = std::accumulate(c_false[j].begin(), c_false[j].end(), 0.0);
      const double p1 = prior[j] * (1 + c_true[j][c]) / (k + 1 + st);
      const double p0 = (1 - prior[j]) * (1 + c_false[j][c]) / (k + 1 + sf);
      out(r, j) = p1 > p0;
    }
  }
  return out;
}

TEST(FitMlknnTest, SmoothedPrior) {
  std::mt19937_64 rng(1);
  auto ds = oracle::RandomDataset(rng, 99, 3, 1);
  for (std::size_t r = 0; r < 99; ++r) ds.labels(r, 0) = 1;
  const auto model = FitMlknn(ds, 10, 1.0);
  EXPECT_DOUBLE_EQ(model.prior[0], 100.0 / 101.0);
}

TEST(FitMlknnTest, ProbabilityTablesAreProper) {
  std::mt19937_64 rng(2);
  const auto model = FitMlknn(oracle::RandomDataset(rng, 120, 5, 4), 7, 1.0);
  for (std::size_t j = 0; j < 4; ++j) {
    EXPECT_GT(model.prior[j], 0.0);
    EXPECT_LT(model.prior[j], 1.0);
    double st = 0, sf = 0;
    for (std::size_t c = 0; c <= 7; ++c) {
      EXPECT_GT(model.posterior_true(j, c), 0.0);
      EXPECT_GT(model.posterior_false(j, c), 0.0);
      st += model.posterior_true(j, c);
      sf += model.posterior_false(j, c);
    }
    EXPECT_NEAR(st, 1.0, 1e-9);
    EXPECT_NEAR(sf, 1.0, 1e-9);
  }
}

TEST(FitMlknnTest, Errors) {
  std::mt19937_64 rng(3);
  const auto ds = oracle::RandomDataset(rng, 10, 2, 2);
  EXPECT_THROW(FitMlknn(ds, 10), Error);
  EXPECT_THROW(FitMlknn(ds, 0), Error);
  EXPECT_THROW(FitMlknn(ds, 3, 0.0), Error);
  const auto model = FitMlknn(ds, 3);
  EXPECT_THROW(PredictMlknn(model, oracle::RandomDataset(rng, 4, 3, 2)), Error);
}

TEST(NearestNeighborsTest, ExcludesSelfAndBreaksTiesByIndex) {
  Matrix<double> ref(5, 1);
  const double xs[] = {0.0, 1.0, 1.0, 1.0, 5.0};
  for (std::size_t i = 0; i < 5; ++i) ref(i, 0) = xs[i];
  const std::vector<double> q = {1.0};
  EXPECT_EQ(NearestNeighbors(ref, q, 2), (std::vector<std::size_t>{1, 2}));
  EXPECT_EQ(NearestNeighbors(ref, q, 2, 1), (std::vector<std::size_t>{2, 3}));
  EXPECT_EQ(NearestNeighbors(ref, ref.row(4), 1, 4), (std::vector<std::size_t>{1}));
}

TEST(FitMlknnTest, SelfIsNeverItsOwnNeighbour) {
  // Pairs of identical points with identical labels; with k=1 every row's
  // neighbour is its twin, so label l is always seen when present.
  MultiLabelDataset ds;
  ds.features = Matrix<double>(8, 1);
  ds.labels = Matrix<std::uint8_t>(8, 1);
  for (std::size_t i = 0; i < 8; ++i) {
    ds.features(i, 0) = static_cast<double>(i / 2) * 10;
    ds.labels(i, 0) = (i / 2) % 2;
  }
  ds.feature_names = {"x"};
  ds.label_names = {"y"};
  const auto model = FitMlknn(ds, 1);
  // 4 positive rows each saw count 1: (1 + 4) / (2 + 4).
  EXPECT_DOUBLE_EQ(model.posterior_true(0, 1), 5.0 / 6.0);
  EXPECT_DOUBLE_EQ(model.posterior_false(0, 0), 5.0 / 6.0);
}

TEST(PredictMlknnTest, UnanimousClusterPredictsLabel) {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> noise(0, 0.01);
  MultiLabelDataset ds;
  ds.features = Matrix<double>(40, 2);
  ds.labels = Matrix<std::uint8_t>(40, 2);
  for (std::size_t r = 0; r < 40; ++r) {
    const bool a = r < 20;
    ds.features(r, 0) = (a ? 0.0 : 1.0) + noise(rng);
    ds.features(r, 1) = (a ? 0.0 : 1.0) + noise(rng);
    ds.labels(r, 0) = a;
    ds.labels(r, 1) = !a;
  }
  ds.feature_names = {"a", "b"};
  ds.label_names = {"p", "q"};
  const auto model = FitMlknn(ds, 5);
  const auto pred = PredictMlknn(model, ds.SelectRows(std::vector<std::size_t>{3, 30}));
  EXPECT_EQ(pred.labels(0, 0), 1);
  EXPECT_EQ(pred.labels(0, 1), 0);
  EXPECT_EQ(pred.labels(1, 0), 0);
  EXPECT_EQ(pred.labels(1, 1), 1);
}

TEST(PredictMlknnTest, ScoresAreProbabilitiesAndDeterministic) {
  std::mt19937_64 rng(5);
  const auto train = oracle::RandomDataset(rng, 150, 4, 5);
  auto test = oracle::RandomDataset(rng, 60, 4, 5);
  // Force exact distance ties with training rows.
  for (std::size_t c = 0; c < 4; ++c) test.features(0, c) = train.features(9, c);
  const auto model = FitMlknn(train, 10);
  const auto a = PredictMlknn(model, test);
  const auto b = PredictMlknn(model, test);
  EXPECT_EQ(a.labels, b.labels);
  EXPECT_EQ(a.scores, b.scores);
  for (std::size_t r = 0; r < 60; ++r) {
    for (std::size_t j = 0; j < 5; ++j) {
      EXPECT_GT(a.scores(r, j), 0.0);
      EXPECT_LT(a.scores(r, j), 1.0);
      EXPECT_EQ(a.labels(r, j), a.scores(r, j) > 0.5 ? 1 : 0);
    }
  }
}

TEST(PredictMlknnTest, AgreesWithReferenceOnRandomData) {
  std::mt19937_64 rng(6);
  const auto train = oracle::RandomDataset(rng, 200, 6, 4);
  const auto test = oracle::RandomDataset(rng, 80, 6, 4);
  EXPECT_EQ(PredictMlknn(FitMlknn(train, 10), test).labels, ReferenceMlknn(train, test, 10));
}

TEST(PredictMlknnTest, YeastAccuracyAgreesWithReference) {
  const auto path = kDataDir / "yeast.csv";
  if (!std::filesystem::exists(path)) GTEST_SKIP() << "yeast.csv not present";
  const auto ds = LoadCsv(path, 14);
  const auto [train, test] = SplitTrainTest(ds, 0.3, 42);
  const auto ours = PredictMlknn(FitMlknn(train, 10), test);
  PredictionSet ref{ReferenceMlknn(train, test, 10), Matrix<double>(test.num_instances(), 14)};
  for (std::size_t r = 0; r < test.num_instances(); ++r) {
    for (std::size_t j = 0; j < 14; ++j) ref.scores(r, j) = ref.labels(r, j);
  }
  const double a = Evaluate(test.labels, ours).accuracy;
  const double b = Evaluate(test.labels, ref).accuracy;
  EXPECT_NEAR(a, b, 0.05);
  EXPECT_GT(a, 0.4);
}

}  // namespace
}  // namespace fmlfs
