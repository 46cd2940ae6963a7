// Slow, definitional reference implementations used to cross-check the
// library. Nothing here calls into fmlfs estimators.

#ifndef FMLFS_TESTS_ORACLES_H_
#define FMLFS_TESTS_ORACLES_H_

#include <cmath>
#include <cstdint>
#include <map>
#include <random>
#include <utility>
#include <vector>

#include "fmlfs/dataset.h"
#include "fmlfs/pareto.h"

namespace fmlfs::oracle {

using Codes = std::vector<std::uint32_t>;

inline std::map<std::uint32_t, double> Marginal(const Codes& a) {
  std::map<std::uint32_t, double> p;
  for (auto v : a) p[v] += 1.0;
  for (auto& [v, c] : p) c /= static_cast<double>(a.size());
  return p;
}

// Full contingency table including zero cells, p(x, y).
inline std::map<std::pair<std::uint32_t, std::uint32_t>, double> Joint(
    const Codes& a, const Codes& b, std::uint32_t card_a, std::uint32_t card_b) {
  std::map<std::pair<std::uint32_t, std::uint32_t>, double> p;
  for (std::uint32_t x = 0; x < card_a; ++x) {
    for (std::uint32_t y = 0; y < card_b; ++y) p[{x, y}] = 0.0;
  }
  for (std::size_t i = 0; i < a.size(); ++i) p[{a[i], b[i]}] += 1.0;
  for (auto& [k, c] : p) c /= static_cast<double>(a.size());
  return p;
}

inline double Entropy(const Codes& a) {
  double h = 0;
  for (const auto& [v, p] : Marginal(a)) h -= p * std::log2(p);
  return h;
}

inline double JointEntropy(const Codes& a, const Codes& b, std::uint32_t ca,
                           std::uint32_t cb) {
  double h = 0;
  for (const auto& [k, p] : Joint(a, b, ca, cb)) {
    if (p > 0) h -= p * std::log2(p);
  }
  return h;
}

// -sum p(x,y) log p(x|y)
inline double ConditionalEntropy(const Codes& a, const Codes& b,
                                 std::uint32_t ca, std::uint32_t cb) {
  const auto pb = Marginal(b);
  double h = 0;
  for (const auto& [k, p] : Joint(a, b, ca, cb)) {
    if (p > 0) h -= p * std::log2(p / pb.at(k.second));
  }
  return h;
}

// sum p(x,y) log(p(x,y) / (p(x) p(y)))
inline double MutualInformation(const Codes& a, const Codes& b,
                                std::uint32_t ca, std::uint32_t cb) {
  const auto pa = Marginal(a);
  const auto pb = Marginal(b);
  double mi = 0;
  for (const auto& [k, p] : Joint(a, b, ca, cb)) {
    if (p > 0) mi += p * std::log2(p / (pa.at(k.first) * pb.at(k.second)));
  }
  return mi;
}

inline double CorrelationDistance(const Codes& a, const Codes& b,
                                  std::uint32_t ca, std::uint32_t cb) {
  return ConditionalEntropy(a, b, ca, cb) + ConditionalEntropy(b, a, cb, ca);
}

// Peels fronts by checking every pair against the dominance definition.
inline std::vector<std::uint32_t> PeelFronts(
    const std::vector<std::pair<double, double>>& pts) {
  const auto dominates = [](const auto& u, const auto& v) {
    return u.first >= v.first && u.second >= v.second &&
           (u.first > v.first || u.second > v.second);
  };
  std::vector<std::uint32_t> front(pts.size(), 0);
  std::size_t assigned = 0;
  for (std::uint32_t level = 1; assigned < pts.size(); ++level) {
    std::vector<std::size_t> current;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      if (front[i] != 0) continue;
      bool dominated = false;
      for (std::size_t j = 0; j < pts.size() && !dominated; ++j) {
        if (j != i && front[j] == 0 && dominates(pts[j], pts[i])) dominated = true;
      }
      if (!dominated) current.push_back(i);
    }
    for (std::size_t i : current) front[i] = level;
    assigned += current.size();
  }
  return front;
}

inline Codes RandomCodes(std::mt19937_64& rng, std::size_t n, std::uint32_t card) {
  std::uniform_int_distribution<std::uint32_t> dist(0, card - 1);
  Codes out(n);
  for (auto& v : out) v = dist(rng);
  return out;
}

inline MultiLabelDataset RandomDataset(std::mt19937_64& rng, std::size_t n,
                                       std::size_t d, std::size_t l,
                                       double positive_rate = 0.4) {
  MultiLabelDataset ds;
  ds.features = Matrix<double>(n, d);
  ds.labels = Matrix<std::uint8_t>(n, l);
  std::normal_distribution<double> x(0.0, 1.0);
  std::bernoulli_distribution y(positive_rate);
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < d; ++c) ds.features(r, c) = x(rng);
    for (std::size_t c = 0; c < l; ++c) ds.labels(r, c) = y(rng) ? 1 : 0;
  }
  for (std::size_t c = 0; c < d; ++c) ds.feature_names.push_back("f" + std::to_string(c));
  for (std::size_t c = 0; c < l; ++c) ds.label_names.push_back("y" + std::to_string(c));
  return ds;
}

}  // namespace fmlfs::oracle

#endif  // FMLFS_TESTS_ORACLES_H_
