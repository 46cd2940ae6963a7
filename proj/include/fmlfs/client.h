#ifndef FMLFS_CLIENT_H_
#define FMLFS_CLIENT_H_

#include <cstdint>

#include "fmlfs/dataset.h"
#include "fmlfs/matrix.h"
#include "fmlfs/pareto.h"
#include "json.hpp"

namespace fmlfs {

inline constexpr std::uint32_t kSchemaVersion = 1;

// D x L mutual information between every feature and every label.
struct MiMatrix {
  Matrix<double> values;
  std::uint32_t client_id = 0;
  std::uint64_t num_instances = 0;
};

// D x D correlation distance between every pair of features.
struct CdMatrix {
  Matrix<double> values;
  std::uint32_t client_id = 0;
  std::uint64_t num_instances = 0;
};

// What a client sends to the server after its local phase.
struct ClientReport {
  MiMatrix mi;
  CdMatrix cd;
  std::uint32_t client_id = 0;
  std::uint32_t schema_version = kSchemaVersion;

  std::size_t num_features() const { return mi.values.rows(); }
  std::size_t num_labels() const { return mi.values.cols(); }
  std::uint64_t num_instances() const { return mi.num_instances; }

  void Validate() const;
};

// Local phase on one shard: MI for every (feature, label) pair and CD for
// every feature pair. CD is evaluated on the upper triangle and mirrored.
ClientReport ComputeLocalReport(const DiscretizedDataset& shard,
                                std::uint32_t client_id);

// Keeps the top_k best-ranked feature columns, in ranking order.
MultiLabelDataset ApplyRanking(const MultiLabelDataset& shard,
                               const FeatureRanking& ranking, std::size_t top_k);

nlohmann::json ToJson(const ClientReport& report);
ClientReport ClientReportFromJson(const nlohmann::json& j);

// Row-major array-of-arrays encoding shared by the report and diagnostics.
nlohmann::json MatrixToJson(const Matrix<double>& m);
Matrix<double> MatrixFromJson(const nlohmann::json& j);

}  // namespace fmlfs

#endif  // FMLFS_CLIENT_H_
