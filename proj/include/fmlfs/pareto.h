#ifndef FMLFS_PARETO_H_
#define FMLFS_PARETO_H_

#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "json.hpp"

namespace fmlfs {

// Objective values of one feature; both objectives are maximized.
struct ObjectivePair {
  std::size_t feature_index = 0;
  double o1 = 0;  // relevance: max MI against any label
  double o2 = 0;  // redundancy distance: max CD against any feature

  friend bool operator==(const ObjectivePair&, const ObjectivePair&) = default;
};

inline constexpr double kInfiniteCrowding = std::numeric_limits<double>::infinity();

// True iff u is no worse than v in both objectives and strictly better in one.
bool Dominates(const ObjectivePair& u, const ObjectivePair& v);

// Pareto front number (1-based) for every point. Front 1 is the maximization
// Pareto set; front k+1 is the non-dominated set once fronts <= k are removed.
std::vector<std::uint32_t> NonDominatedSort(std::span<const ObjectivePair> points);

// Crowding distance of points that share one front. The extremes of each
// objective get +inf; interior points add the normalized gap between their
// neighbours. An objective with zero spread adds nothing to interior points.
std::vector<double> CrowdingDistance(std::span<const ObjectivePair> front);

struct FeatureRecord {
  std::size_t feature = 0;
  std::uint32_t front = 0;
  double crowding = 0;
  double score = 0;

  friend bool operator==(const FeatureRecord&, const FeatureRecord&) = default;
};

struct FeatureRanking {
  std::vector<FeatureRecord> records;  // indexed by feature
  std::vector<std::size_t> order;      // best first

  std::size_t num_features() const { return records.size(); }
  void Validate() const;

  friend bool operator==(const FeatureRanking&, const FeatureRanking&) = default;
};

// S = P + 1/(1+d), with d = +inf giving S = P exactly.
double Score(std::uint32_t front, double crowding);

// Records for features 0..n-1 ordered by ascending score, ties by index.
FeatureRanking ScoreAndRank(std::span<const std::uint32_t> fronts,
                            std::span<const double> crowding);

// Sort, per-front crowding, score, order.
FeatureRanking RankFeatures(std::span<const ObjectivePair> points);

nlohmann::json ToJson(const FeatureRanking& ranking);
FeatureRanking FeatureRankingFromJson(const nlohmann::json& j);

}  // namespace fmlfs

#endif  // FMLFS_PARETO_H_
