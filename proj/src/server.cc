#include "fmlfs/server.h"

#include <algorithm>
#include <set>
#include <string>

#include "fmlfs/error.h"

namespace fmlfs {
namespace {

// mean = ref + sum_i w_i (x_i - ref) / sum_i w_i, with ref the first
// canonical report. Equal inputs therefore average to themselves exactly.
Matrix<double> WeightedMean(std::span<const Matrix<double>* const> parts,
                            std::span<const double> weights) {
  const Matrix<double>& ref = *parts.front();
  double total_weight = 0;
  for (double w : weights) total_weight += w;
  Matrix<double> out(ref.rows(), ref.cols());
  for (std::size_t r = 0; r < ref.rows(); ++r) {
    for (std::size_t c = 0; c < ref.cols(); ++c) {
      const double base = ref(r, c);
      double delta = 0;
      for (std::size_t i = 0; i < parts.size(); ++i) {
        delta += weights[i] * ((*parts[i])(r, c) - base);
      }
      out(r, c) = base + delta / total_weight;
    }
  }
  return out;
}

}  // namespace

AggregatedStats Aggregate(std::span<const ClientReport> reports,
                          Weighting weighting) {
  if (reports.size() < 2) {
    throw InvalidArgument("aggregation needs reports from at least 2 clients");
  }
  std::vector<const ClientReport*> sorted;
  for (const auto& r : reports) sorted.push_back(&r);
  std::ranges::sort(sorted, {}, &ClientReport::client_id);

  const std::size_t d = sorted.front()->num_features();
  const std::size_t l = sorted.front()->num_labels();
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    const ClientReport& r = *sorted[i];
    if (i > 0 && r.client_id == sorted[i - 1]->client_id) {
      throw ProtocolError("duplicate report from client " +
                          std::to_string(r.client_id));
    }
    r.Validate();
    if (r.num_features() != d || r.num_labels() != l) {
      throw DataError("report from client " + std::to_string(r.client_id) +
                      " has shape " + std::to_string(r.num_features()) + "x" +
                      std::to_string(r.num_labels()) + ", expected " +
                      std::to_string(d) + "x" + std::to_string(l));
    }
  }

  std::vector<const Matrix<double>*> mi;
  std::vector<const Matrix<double>*> cd;
  std::vector<double> weights;
  for (const ClientReport* r : sorted) {
    mi.push_back(&r->mi.values);
    cd.push_back(&r->cd.values);
    weights.push_back(weighting == Weighting::kByInstances
                          ? static_cast<double>(r->num_instances())
                          : 1.0);
  }
  AggregatedStats stats;
  stats.num_clients = static_cast<std::uint32_t>(sorted.size());
  stats.mi_global = WeightedMean(mi, weights);
  stats.cd_global = WeightedMean(cd, weights);
  return stats;
}

std::vector<ObjectivePair> Objectives(const AggregatedStats& stats) {
  const std::size_t d = stats.mi_global.rows();
  std::vector<ObjectivePair> out(d);
  for (std::size_t i = 0; i < d; ++i) {
    out[i].feature_index = i;
    out[i].o1 = std::ranges::max(stats.mi_global.row(i));
    out[i].o2 = std::ranges::max(stats.cd_global.row(i));
  }
  return out;
}

nlohmann::json ToJson(const AggregatedStats& stats) {
  return {{"schema_version", kSchemaVersion},
          {"num_clients", stats.num_clients},
          {"mi", MatrixToJson(stats.mi_global)},
          {"cd", MatrixToJson(stats.cd_global)}};
}

}  // namespace fmlfs
