#include "fmlfs/pareto.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "fmlfs/error.h"

namespace fmlfs {

bool Dominates(const ObjectivePair& u, const ObjectivePair& v) {
  return u.o1 >= v.o1 && u.o2 >= v.o2 && (u.o1 > v.o1 || u.o2 > v.o2);
}

std::vector<std::uint32_t> NonDominatedSort(std::span<const ObjectivePair> points) {
  if (points.empty()) throw InvalidArgument("no points to sort");
  for (const auto& p : points) {
    if (std::isnan(p.o1) || std::isnan(p.o2)) {
      throw InvalidArgument("objective value of feature " +
                            std::to_string(p.feature_index) + " is NaN");
    }
  }
  const std::size_t n = points.size();
  // Domination-count bookkeeping: dominated_by[i] counts points that dominate
  // i, dominates[i] lists the points i dominates.
  std::vector<std::size_t> dominated_by(n, 0);
  std::vector<std::vector<std::size_t>> dominates(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (Dominates(points[i], points[j])) {
        dominates[i].push_back(j);
        ++dominated_by[j];
      } else if (Dominates(points[j], points[i])) {
        dominates[j].push_back(i);
        ++dominated_by[i];
      }
    }
  }

  std::vector<std::uint32_t> front(n, 0);
  std::vector<std::size_t> current;
  for (std::size_t i = 0; i < n; ++i) {
    if (dominated_by[i] == 0) current.push_back(i);
  }
  std::uint32_t rank = 1;
  while (!current.empty()) {
    std::vector<std::size_t> next;
    for (std::size_t i : current) {
      front[i] = rank;
      for (std::size_t j : dominates[i]) {
        if (--dominated_by[j] == 0) next.push_back(j);
      }
    }
    current = std::move(next);
    ++rank;
  }
  return front;
}

std::vector<double> CrowdingDistance(std::span<const ObjectivePair> front) {
  if (front.empty()) throw InvalidArgument("crowding distance of an empty front");
  const std::size_t n = front.size();
  std::vector<double> distance(n, 0.0);
  std::vector<std::size_t> idx(n);
  for (double ObjectivePair::*objective : {&ObjectivePair::o1, &ObjectivePair::o2}) {
    std::iota(idx.begin(), idx.end(), 0);
    std::ranges::stable_sort(idx, [&](std::size_t a, std::size_t b) {
      return front[a].*objective < front[b].*objective;
    });
    distance[idx.front()] = kInfiniteCrowding;
    distance[idx.back()] = kInfiniteCrowding;
    const double spread = front[idx.back()].*objective - front[idx.front()].*objective;
    if (!(spread > 0)) continue;
    for (std::size_t k = 1; k + 1 < n; ++k) {
      distance[idx[k]] +=
          (front[idx[k + 1]].*objective - front[idx[k - 1]].*objective) / spread;
    }
  }
  return distance;
}

double Score(std::uint32_t front, double crowding) {
  const double bonus = std::isinf(crowding) ? 0.0 : 1.0 / (1.0 + crowding);
  return static_cast<double>(front) + bonus;
}

void FeatureRanking::Validate() const {
  const std::size_t n = records.size();
  if (order.size() != n) throw DataError("ranking order length mismatch");
  std::vector<bool> seen(n, false);
  for (std::size_t f : order) {
    if (f >= n || seen[f]) throw DataError("ranking order is not a permutation");
    seen[f] = true;
  }
  for (std::size_t i = 0; i < n; ++i) {
    const auto& r = records[i];
    if (r.feature != i) throw DataError("ranking records out of feature order");
    if (r.front < 1 || r.front > n) throw DataError("front number out of range");
    if (!(r.crowding >= 0)) throw DataError("negative crowding distance");
  }
  for (std::size_t k = 1; k < n; ++k) {
    if (records[order[k]].score < records[order[k - 1]].score) {
      throw DataError("ranking order is not sorted by score");
    }
  }
}

FeatureRanking ScoreAndRank(std::span<const std::uint32_t> fronts,
                            std::span<const double> crowding) {
  if (fronts.size() != crowding.size()) {
    throw InvalidArgument("front and crowding vectors differ in length");
  }
  FeatureRanking ranking;
  const std::size_t n = fronts.size();
  ranking.records.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    ranking.records[i] = {i, fronts[i], crowding[i], Score(fronts[i], crowding[i])};
  }
  ranking.order.resize(n);
  std::iota(ranking.order.begin(), ranking.order.end(), 0);
  std::ranges::sort(ranking.order, [&](std::size_t a, std::size_t b) {
    const double sa = ranking.records[a].score;
    const double sb = ranking.records[b].score;
    return sa != sb ? sa < sb : a < b;
  });
  return ranking;
}

FeatureRanking RankFeatures(std::span<const ObjectivePair> points) {
  const std::size_t n = points.size();
  std::vector<bool> seen(n, false);
  for (const auto& p : points) {
    if (p.feature_index >= n || seen[p.feature_index]) {
      throw InvalidArgument("feature indices must be a permutation of 0..D-1");
    }
    seen[p.feature_index] = true;
  }
  std::vector<ObjectivePair> by_feature(n);
  for (const auto& p : points) by_feature[p.feature_index] = p;

  const std::vector<std::uint32_t> fronts = NonDominatedSort(by_feature);
  const std::uint32_t num_fronts = *std::ranges::max_element(fronts);
  std::vector<double> crowding(n, 0.0);
  for (std::uint32_t f = 1; f <= num_fronts; ++f) {
    std::vector<std::size_t> members;
    std::vector<ObjectivePair> front_points;
    for (std::size_t i = 0; i < n; ++i) {
      if (fronts[i] == f) {
        members.push_back(i);
        front_points.push_back(by_feature[i]);
      }
    }
    const std::vector<double> d = CrowdingDistance(front_points);
    for (std::size_t k = 0; k < members.size(); ++k) crowding[members[k]] = d[k];
  }
  return ScoreAndRank(fronts, crowding);
}

nlohmann::json ToJson(const FeatureRanking& ranking) {
  nlohmann::json records = nlohmann::json::array();
  for (const auto& r : ranking.records) {
    nlohmann::json crowding = r.crowding;
    if (std::isinf(r.crowding)) crowding = "inf";
    records.push_back({{"feature", r.feature},
                       {"front", r.front},
                       {"crowding", crowding},
                       {"score", r.score}});
  }
  return {{"order", ranking.order}, {"records", records}};
}

FeatureRanking FeatureRankingFromJson(const nlohmann::json& j) {
  FeatureRanking ranking;
  try {
    ranking.order = j.at("order").get<std::vector<std::size_t>>();
    for (const auto& r : j.at("records")) {
      FeatureRecord rec;
      rec.feature = r.at("feature").get<std::size_t>();
      rec.front = r.at("front").get<std::uint32_t>();
      const auto& c = r.at("crowding");
      if (c.is_string()) {
        if (c.get<std::string>() != "inf") throw DataError("bad crowding value");
        rec.crowding = kInfiniteCrowding;
      } else {
        rec.crowding = c.get<double>();
      }
      rec.score = r.at("score").get<double>();
      ranking.records.push_back(rec);
    }
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed feature ranking: ") + e.what());
  }
  ranking.Validate();
  return ranking;
}

}  // namespace fmlfs
