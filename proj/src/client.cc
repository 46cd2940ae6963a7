#include "fmlfs/client.h"

#include <cmath>
#include <string>

#include "fmlfs/error.h"
#include "fmlfs/infotheory.h"

namespace fmlfs {

void ClientReport::Validate() const {
  if (schema_version != kSchemaVersion) {
    throw ProtocolError("unsupported report schema version " +
                        std::to_string(schema_version));
  }
  if (mi.client_id != client_id || cd.client_id != client_id) {
    throw DataError("report matrices disagree on client id");
  }
  const std::size_t d = mi.values.rows();
  if (d == 0 || mi.values.cols() == 0) throw DataError("report MI matrix is empty");
  if (cd.values.rows() != d || cd.values.cols() != d) {
    throw DataError("report CD matrix is not D x D");
  }
  for (double v : mi.values.data()) {
    if (!std::isfinite(v) || v < 0) throw DataError("report MI entry is invalid");
  }
  for (double v : cd.values.data()) {
    if (!std::isfinite(v) || v < 0) throw DataError("report CD entry is invalid");
  }
}

ClientReport ComputeLocalReport(const DiscretizedDataset& shard,
                                std::uint32_t client_id) {
  const std::size_t n = shard.num_instances();
  const std::size_t d = shard.num_features();
  const std::size_t l = shard.num_labels();
  if (n == 0) throw DataError("client shard is empty");
  const auto bins = static_cast<std::uint32_t>(shard.num_bins);

  std::vector<DiscreteColumn> features;
  features.reserve(d);
  for (const auto& codes : shard.feature_codes) features.emplace_back(codes, bins);
  std::vector<DiscreteColumn> labels;
  labels.reserve(l);
  for (const auto& codes : shard.label_codes) labels.emplace_back(codes, 2);

  ClientReport report;
  report.client_id = client_id;
  report.mi = {Matrix<double>(d, l), client_id, n};
  report.cd = {Matrix<double>(d, d), client_id, n};

  for (std::size_t a = 0; a < d; ++a) {
    for (std::size_t b = 0; b < l; ++b) {
      report.mi.values(a, b) = MutualInformation(features[a], labels[b]);
    }
  }
  for (std::size_t a = 0; a < d; ++a) {
    for (std::size_t b = a + 1; b < d; ++b) {
      const double cd = CorrelationDistance(features[a], features[b]);
      report.cd.values(a, b) = cd;
      report.cd.values(b, a) = cd;
    }
  }
  return report;
}

MultiLabelDataset ApplyRanking(const MultiLabelDataset& shard,
                               const FeatureRanking& ranking, std::size_t top_k) {
  if (ranking.num_features() != shard.num_features()) {
    throw InvalidArgument("ranking covers " +
                          std::to_string(ranking.num_features()) +
                          " features but the shard has " +
                          std::to_string(shard.num_features()));
  }
  if (top_k < 1 || top_k > shard.num_features()) {
    throw InvalidArgument("top_k must lie in [1, " +
                          std::to_string(shard.num_features()) + "]");
  }
  const std::span<const std::size_t> keep(ranking.order.data(), top_k);
  return shard.SelectFeatures(keep);
}

nlohmann::json MatrixToJson(const Matrix<double>& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (std::size_t r = 0; r < m.rows(); ++r) {
    const auto row = m.row(r);
    rows.push_back(std::vector<double>(row.begin(), row.end()));
  }
  return rows;
}

Matrix<double> MatrixFromJson(const nlohmann::json& j) {
  if (!j.is_array() || j.empty()) throw DataError("matrix must be a non-empty array");
  const std::size_t cols = j.front().size();
  Matrix<double> m(j.size(), cols);
  for (std::size_t r = 0; r < j.size(); ++r) {
    if (!j[r].is_array() || j[r].size() != cols) {
      throw DataError("matrix rows differ in length");
    }
    for (std::size_t c = 0; c < cols; ++c) m(r, c) = j[r][c].get<double>();
  }
  return m;
}

nlohmann::json ToJson(const ClientReport& report) {
  return {{"schema_version", report.schema_version},
          {"client_id", report.client_id},
          {"n", report.num_instances()},
          {"mi", MatrixToJson(report.mi.values)},
          {"cd", MatrixToJson(report.cd.values)}};
}

ClientReport ClientReportFromJson(const nlohmann::json& j) {
  ClientReport report;
  try {
    report.schema_version = j.at("schema_version").get<std::uint32_t>();
    report.client_id = j.at("client_id").get<std::uint32_t>();
    const auto n = j.at("n").get<std::uint64_t>();
    report.mi = {MatrixFromJson(j.at("mi")), report.client_id, n};
    report.cd = {MatrixFromJson(j.at("cd")), report.client_id, n};
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed client report: ") + e.what());
  }
  report.Validate();
  return report;
}

}  // namespace fmlfs
