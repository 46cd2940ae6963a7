#include "fmlfs/dataset.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <random>
#include <sstream>
#include <string>

#include "fmlfs/error.h"
#include "fmlfs/text.h"

namespace fmlfs {

void MultiLabelDataset::Validate() const {
  if (num_instances() < 1) throw DataError("dataset has no instances");
  if (num_features() < 1) throw DataError("dataset has no features");
  if (num_labels() < 1) throw DataError("dataset has no labels");
  if (labels.rows() != features.rows()) {
    throw DataError("feature and label matrices differ in row count");
  }
  if (feature_names.size() != num_features() ||
      label_names.size() != num_labels()) {
    throw DataError("column name count does not match matrix width");
  }
  for (std::uint8_t v : labels.data()) {
    if (v > 1) throw DataError("label matrix contains a non-binary value");
  }
}

MultiLabelDataset MultiLabelDataset::SelectRows(
    std::span<const std::size_t> rows) const {
  MultiLabelDataset out;
  out.features = Matrix<double>(rows.size(), num_features());
  out.labels = Matrix<std::uint8_t>(rows.size(), num_labels());
  out.feature_names = feature_names;
  out.label_names = label_names;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i] >= num_instances()) {
      throw InvalidArgument("row index out of range");
    }
    std::ranges::copy(features.row(rows[i]), out.features.row(i).begin());
    std::ranges::copy(labels.row(rows[i]), out.labels.row(i).begin());
  }
  return out;
}

MultiLabelDataset MultiLabelDataset::SelectFeatures(
    std::span<const std::size_t> cols) const {
  MultiLabelDataset out;
  out.features = Matrix<double>(num_instances(), cols.size());
  out.labels = labels;
  out.label_names = label_names;
  for (std::size_t c : cols) {
    if (c >= num_features()) throw InvalidArgument("feature index out of range");
    out.feature_names.push_back(feature_names[c]);
  }
  for (std::size_t r = 0; r < num_instances(); ++r) {
    for (std::size_t j = 0; j < cols.size(); ++j) {
      out.features(r, j) = features(r, cols[j]);
    }
  }
  return out;
}

MultiLabelDataset ConcatRows(std::span<const MultiLabelDataset> parts) {
  if (parts.empty()) throw InvalidArgument("nothing to concatenate");
  const MultiLabelDataset& first = parts.front();
  std::size_t total = 0;
  for (const auto& p : parts) {
    if (p.feature_names != first.feature_names ||
        p.label_names != first.label_names) {
      throw InvalidArgument("cannot concatenate datasets with different columns");
    }
    total += p.num_instances();
  }
  MultiLabelDataset out;
  out.features = Matrix<double>(total, first.num_features());
  out.labels = Matrix<std::uint8_t>(total, first.num_labels());
  out.feature_names = first.feature_names;
  out.label_names = first.label_names;
  std::size_t r = 0;
  for (const auto& p : parts) {
    for (std::size_t i = 0; i < p.num_instances(); ++i, ++r) {
      std::ranges::copy(p.features.row(i), out.features.row(r).begin());
      std::ranges::copy(p.labels.row(i), out.labels.row(r).begin());
    }
  }
  return out;
}

DiscretizedDataset Discretize(const MultiLabelDataset& ds, std::size_t bins) {
  if (bins < 2) throw InvalidArgument("bin count must be at least 2");
  const std::size_t n = ds.num_instances();
  const std::size_t d = ds.num_features();
  if (n == 0) throw DataError("cannot discretize an empty dataset");

  DiscretizedDataset out;
  out.num_bins = bins;
  out.feature_codes.assign(d, std::vector<std::uint32_t>(n, 0));
  out.bin_edges.resize(d);
  const auto last_bin = static_cast<std::uint32_t>(bins - 1);
  for (std::size_t f = 0; f < d; ++f) {
    double lo = ds.features(0, f);
    double hi = lo;
    for (std::size_t r = 1; r < n; ++r) {
      lo = std::min(lo, ds.features(r, f));
      hi = std::max(hi, ds.features(r, f));
    }
    const double range = hi - lo;
    auto& edges = out.bin_edges[f];
    edges.resize(bins - 1);
    for (std::size_t b = 1; b < bins; ++b) {
      edges[b - 1] = lo + range * static_cast<double>(b) / static_cast<double>(bins);
    }
    if (!(range > 0)) continue;  // constant column stays in bin 0
    auto& codes = out.feature_codes[f];
    for (std::size_t r = 0; r < n; ++r) {
      const double pos = (ds.features(r, f) - lo) / range * static_cast<double>(bins);
      codes[r] = std::min(last_bin, static_cast<std::uint32_t>(pos));
    }
  }

  out.label_codes.assign(ds.num_labels(), std::vector<std::uint32_t>(n, 0));
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t l = 0; l < ds.num_labels(); ++l) {
      out.label_codes[l][r] = ds.labels(r, l);
    }
  }
  return out;
}

std::vector<std::vector<std::size_t>> PartitionPlan::RowsPerClient() const {
  std::vector<std::vector<std::size_t>> rows(num_clients);
  for (std::size_t i = 0; i < assignments.size(); ++i) {
    if (assignments[i] >= num_clients) {
      throw DataError("partition assigns a row to an unknown client");
    }
    rows[assignments[i]].push_back(i);
  }
  return rows;
}

void PartitionPlan::Validate() const {
  if (num_clients < 2) throw InvalidArgument("at least 2 clients are required");
  for (const auto& rows : RowsPerClient()) {
    if (rows.empty()) throw DataError("partition leaves a client without rows");
  }
}

nlohmann::json ToJson(const PartitionPlan& plan) {
  return {{"seed", plan.seed},
          {"num_clients", plan.num_clients},
          {"assignments", plan.assignments}};
}

PartitionPlan PartitionPlanFromJson(const nlohmann::json& j) {
  PartitionPlan plan;
  try {
    plan.seed = j.at("seed").get<std::uint64_t>();
    plan.num_clients = j.at("num_clients").get<std::uint32_t>();
    plan.assignments = j.at("assignments").get<std::vector<std::uint32_t>>();
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed partition plan: ") + e.what());
  }
  plan.Validate();
  return plan;
}

namespace {

std::vector<double> SampleDirichlet(std::size_t k, double alpha,
                                    std::mt19937_64& rng) {
  std::gamma_distribution<double> gamma(alpha, 1.0);
  std::vector<double> p(k);
  double sum = 0;
  for (auto& v : p) {
    v = gamma(rng);
    sum += v;
  }
  if (!(sum > 0)) {
    // Every draw underflowed (tiny alpha): put all mass on one client.
    std::fill(p.begin(), p.end(), 0.0);
    p[std::uniform_int_distribution<std::size_t>(0, k - 1)(rng)] = 1.0;
    return p;
  }
  for (auto& v : p) v /= sum;
  return p;
}

constexpr int kMaxPartitionAttempts = 100;

}  // namespace

PartitionPlan PartitionNonIid(const MultiLabelDataset& ds,
                              std::uint32_t num_clients, double alpha,
                              std::uint64_t seed) {
  if (num_clients < 2) throw InvalidArgument("at least 2 clients are required");
  if (!(alpha > 0) || !std::isfinite(alpha)) {
    throw InvalidArgument("dirichlet alpha must be positive and finite");
  }
  const std::size_t n = ds.num_instances();
  if (num_clients > n) {
    throw InvalidArgument("more clients than instances");
  }

  const std::size_t num_classes = ds.num_labels() + 1;
  std::vector<std::vector<std::size_t>> by_class(num_classes);
  for (std::size_t r = 0; r < n; ++r) {
    std::size_t cls = ds.num_labels();
    for (std::size_t l = 0; l < ds.num_labels(); ++l) {
      if (ds.labels(r, l) != 0) {
        cls = l;
        break;
      }
    }
    by_class[cls].push_back(r);
  }

  PartitionPlan plan;
  plan.num_clients = num_clients;
  plan.seed = seed;
  plan.assignments.assign(n, 0);
  std::mt19937_64 rng(seed);

  std::vector<std::size_t> sizes(num_clients);
  for (int attempt = 0; attempt < kMaxPartitionAttempts; ++attempt) {
    std::fill(sizes.begin(), sizes.end(), 0);
    for (const auto& members : by_class) {
      if (members.empty()) continue;
      std::vector<std::size_t> rows = members;
      std::shuffle(rows.begin(), rows.end(), rng);
      const std::vector<double> p = SampleDirichlet(num_clients, alpha, rng);
      double cumulative = 0;
      std::size_t begin = 0;
      for (std::uint32_t c = 0; c < num_clients; ++c) {
        cumulative += p[c];
        std::size_t end =
            c + 1 == num_clients
                ? rows.size()
                : std::min(rows.size(),
                           static_cast<std::size_t>(std::llround(
                               cumulative * static_cast<double>(rows.size()))));
        end = std::max(end, begin);
        for (std::size_t i = begin; i < end; ++i) plan.assignments[rows[i]] = c;
        sizes[c] += end - begin;
        begin = end;
      }
    }
    if (std::ranges::find(sizes, 0u) == sizes.end()) return plan;
  }

  // Dirichlet draws kept starving some client; hand each empty client one row
  // from the currently largest client.
  for (std::uint32_t c = 0; c < num_clients; ++c) {
    if (sizes[c] != 0) continue;
    const auto donor = static_cast<std::uint32_t>(
        std::ranges::max_element(sizes) - sizes.begin());
    for (std::size_t r = n; r-- > 0;) {
      if (plan.assignments[r] == donor) {
        plan.assignments[r] = c;
        break;
      }
    }
    --sizes[donor];
    ++sizes[c];
  }
  return plan;
}

std::vector<MultiLabelDataset> ApplyPartition(const MultiLabelDataset& ds,
                                              const PartitionPlan& plan) {
  if (plan.assignments.size() != ds.num_instances()) {
    throw InvalidArgument("partition plan does not match dataset size");
  }
  plan.Validate();
  std::vector<MultiLabelDataset> shards;
  for (const auto& rows : plan.RowsPerClient()) {
    shards.push_back(ds.SelectRows(rows));
  }
  return shards;
}

std::pair<MultiLabelDataset, MultiLabelDataset> SplitTrainTest(
    const MultiLabelDataset& ds, double test_fraction, std::uint64_t seed) {
  if (!(test_fraction > 0 && test_fraction < 1)) {
    throw InvalidArgument("test fraction must lie strictly between 0 and 1");
  }
  const std::size_t n = ds.num_instances();
  const auto n_test = static_cast<std::size_t>(
      std::llround(test_fraction * static_cast<double>(n)));
  if (n_test == 0 || n_test >= n) {
    throw InvalidArgument("split would leave the train or test part empty");
  }
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::mt19937_64 rng(seed);
  std::shuffle(idx.begin(), idx.end(), rng);
  std::vector<std::size_t> test(idx.begin(), idx.begin() + n_test);
  std::vector<std::size_t> train(idx.begin() + n_test, idx.end());
  std::ranges::sort(test);
  std::ranges::sort(train);
  return {ds.SelectRows(train), ds.SelectRows(test)};
}

MultiLabelDataset ParseCsv(std::istream& in, std::size_t num_labels) {
  if (num_labels < 1) throw InvalidArgument("at least one label column is required");
  std::string line;
  if (!std::getline(in, line)) throw DataError("CSV has no header row");
  const std::vector<std::string> header = SplitFields(line, ',');
  if (header.size() < num_labels + 1) {
    throw DataError("CSV header has fewer than labels + 1 columns");
  }
  const std::size_t d = header.size() - num_labels;

  std::vector<double> values;
  std::vector<std::uint8_t> label_values;
  std::size_t rows = 0;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (Trim(line).empty()) continue;
    const std::vector<std::string> cells = SplitFields(line, ',');
    if (cells.size() != header.size()) {
      throw DataError("CSV line " + std::to_string(line_no) + " has " +
                      std::to_string(cells.size()) + " fields, expected " +
                      std::to_string(header.size()));
    }
    for (std::size_t c = 0; c < d; ++c) {
      auto v = ParseDouble(cells[c]);
      if (!v) {
        throw DataError("CSV line " + std::to_string(line_no) +
                        ": non-numeric feature value '" + cells[c] + "'");
      }
      values.push_back(*v);
    }
    for (std::size_t c = d; c < cells.size(); ++c) {
      auto v = ParseDouble(cells[c]);
      if (!v || (*v != 0.0 && *v != 1.0)) {
        throw DataError("CSV line " + std::to_string(line_no) +
                        ": label value '" + cells[c] + "' is not 0 or 1");
      }
      label_values.push_back(static_cast<std::uint8_t>(*v));
    }
    ++rows;
  }
  if (rows == 0) throw DataError("CSV has no data rows");

  MultiLabelDataset ds;
  ds.features = Matrix<double>(rows, d);
  ds.labels = Matrix<std::uint8_t>(rows, num_labels);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < d; ++c) ds.features(r, c) = values[r * d + c];
    for (std::size_t l = 0; l < num_labels; ++l) {
      ds.labels(r, l) = label_values[r * num_labels + l];
    }
  }
  ds.feature_names.assign(header.begin(), header.begin() + d);
  ds.label_names.assign(header.begin() + d, header.end());
  ds.Validate();
  return ds;
}

MultiLabelDataset LoadCsv(const std::filesystem::path& path,
                          std::size_t num_labels) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open " + path.string());
  return ParseCsv(in, num_labels);
}

void WriteCsv(const MultiLabelDataset& ds, std::ostream& out) {
  bool first = true;
  for (const auto& names : {ds.feature_names, ds.label_names}) {
    for (const auto& name : names) {
      if (!first) out << ',';
      out << name;
      first = false;
    }
  }
  out << '\n';
  for (std::size_t r = 0; r < ds.num_instances(); ++r) {
    for (std::size_t c = 0; c < ds.num_features(); ++c) {
      if (c) out << ',';
      out << FormatDouble(ds.features(r, c));
    }
    for (std::size_t l = 0; l < ds.num_labels(); ++l) {
      out << ',' << static_cast<int>(ds.labels(r, l));
    }
    out << '\n';
  }
}

}  // namespace fmlfs
