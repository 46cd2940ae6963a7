#ifndef FMLFS_DATASET_H_
#define FMLFS_DATASET_H_

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "fmlfs/matrix.h"
#include "json.hpp"

namespace fmlfs {

// N instances, D real-valued features and L binary labels per instance.
struct MultiLabelDataset {
  Matrix<double> features;        // N x D
  Matrix<std::uint8_t> labels;    // N x L, entries in {0,1}
  std::vector<std::string> feature_names;
  std::vector<std::string> label_names;

  std::size_t num_instances() const { return features.rows(); }
  std::size_t num_features() const { return features.cols(); }
  std::size_t num_labels() const { return labels.cols(); }

  // Throws DataError if any structural invariant is broken.
  void Validate() const;

  MultiLabelDataset SelectRows(std::span<const std::size_t> rows) const;
  // Keeps the given feature columns in the given order; labels untouched.
  MultiLabelDataset SelectFeatures(std::span<const std::size_t> cols) const;
};

// Concatenates datasets row-wise. All parts must share the same columns.
MultiLabelDataset ConcatRows(std::span<const MultiLabelDataset> parts);

// Integer-coded copy of a dataset. Storage is column-major so that the
// estimators can walk one feature at a time.
struct DiscretizedDataset {
  std::size_t num_bins = 0;
  std::vector<std::vector<std::uint32_t>> feature_codes;  // D columns of N
  std::vector<std::vector<double>> bin_edges;             // D lists of B-1
  std::vector<std::vector<std::uint32_t>> label_codes;    // L columns of N

  std::size_t num_instances() const {
    return feature_codes.empty() ? 0 : feature_codes.front().size();
  }
  std::size_t num_features() const { return feature_codes.size(); }
  std::size_t num_labels() const { return label_codes.size(); }
  std::uint32_t code(std::size_t row, std::size_t feature) const {
    return feature_codes[feature][row];
  }
};

inline constexpr std::size_t kDefaultBins = 10;

// Equal-width binning per feature over that feature's [min, max]. Constant
// features map to bin 0; the maximum maps to bin B-1.
DiscretizedDataset Discretize(const MultiLabelDataset& ds,
                              std::size_t bins = kDefaultBins);

struct PartitionPlan {
  std::vector<std::uint32_t> assignments;  // client id per row
  std::uint32_t num_clients = 0;
  std::uint64_t seed = 0;

  std::vector<std::vector<std::size_t>> RowsPerClient() const;
  void Validate() const;
};

nlohmann::json ToJson(const PartitionPlan& plan);
PartitionPlan PartitionPlanFromJson(const nlohmann::json& j);

// Label-skewed split: each row's class is its lowest-index positive label
// (rows with no positive label share an extra class), and every class is
// spread over the clients by proportions drawn from Dirichlet(alpha).
PartitionPlan PartitionNonIid(const MultiLabelDataset& ds,
                              std::uint32_t num_clients, double alpha,
                              std::uint64_t seed);

std::vector<MultiLabelDataset> ApplyPartition(const MultiLabelDataset& ds,
                                              const PartitionPlan& plan);

// Shuffled split; returns {train, test}.
std::pair<MultiLabelDataset, MultiLabelDataset> SplitTrainTest(
    const MultiLabelDataset& ds, double test_fraction, std::uint64_t seed);

// Either the number of trailing label attributes, or a Mulan XML manifest
// naming the label attributes.
using LabelSpec = std::variant<std::size_t, std::filesystem::path>;

MultiLabelDataset LoadArff(const std::filesystem::path& path,
                           const LabelSpec& labels);
MultiLabelDataset ParseArff(std::istream& in, const LabelSpec& labels);
std::vector<std::string> ParseLabelXml(std::istream& in);

MultiLabelDataset LoadCsv(const std::filesystem::path& path,
                          std::size_t num_labels);
MultiLabelDataset ParseCsv(std::istream& in, std::size_t num_labels);
void WriteCsv(const MultiLabelDataset& ds, std::ostream& out);

}  // namespace fmlfs

#endif  // FMLFS_DATASET_H_
