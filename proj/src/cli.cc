#include "fmlfs/cli.h"

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "fmlfs/client.h"
#include "fmlfs/dataset.h"
#include "fmlfs/error.h"
#include "fmlfs/metrics.h"
#include "fmlfs/mlknn.h"
#include "fmlfs/text.h"

namespace fmlfs {

std::string_view ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "invalid_argument";
    case ErrorCode::kDataError: return "data_error";
    case ErrorCode::kProtocolError: return "protocol_error";
    case ErrorCode::kTimeout: return "timeout";
    case ErrorCode::kIoError: return "io_error";
  }
  return "unknown";
}

std::vector<std::size_t> ParseTopKList(std::string_view text) {
  std::vector<std::string> parts = SplitFields(text, ',');
  std::vector<std::size_t> values;
  const auto parse = [](const std::string& s) {
    std::size_t v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) {
      throw InvalidArgument("invalid top-k value '" + s + "'");
    }
    return v;
  };
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (parts[i] != "...") {
      values.push_back(parse(parts[i]));
      continue;
    }
    if (values.size() < 2 || i + 1 != parts.size() - 1) {
      throw InvalidArgument("'...' needs two leading values and one end value");
    }
    const std::size_t a = values[values.size() - 2];
    const std::size_t b = values.back();
    const std::size_t end = parse(parts[i + 1]);
    if (b <= a || end < b || (end - a) % (b - a) != 0) {
      throw InvalidArgument("'...' range does not step evenly to its end value");
    }
    for (std::size_t v = b + (b - a); v <= end; v += b - a) values.push_back(v);
    break;
  }
  if (values.empty()) throw InvalidArgument("empty top-k list");
  if (!std::ranges::is_sorted(values) ||
      std::ranges::adjacent_find(values) != values.end()) {
    throw InvalidArgument("top-k values must be strictly ascending");
  }
  return values;
}

std::vector<std::size_t> DefaultTopK(std::size_t num_features) {
  std::vector<std::size_t> out;
  for (std::size_t k = 10; k <= std::min<std::size_t>(100, num_features); k += 10) {
    out.push_back(k);
  }
  if (out.empty()) out.push_back(num_features);
  return out;
}

namespace {

constexpr std::string_view kMetricsSchema = "fmlfs.metrics/1";
constexpr std::uint64_t kPartitionSeedOffset = 1;

const std::vector<std::string>& MetricNames() {
  static const std::vector<std::string> names = {
      "accuracy", "f_measure", "hamming_loss", "ranking_loss", "avg_precision",
      "coverage"};
  return names;
}

MultiLabelDataset LoadDataset(const ExperimentSpec& spec) {
  const auto& path = spec.run.dataset;
  const std::string ext = ToLower(path.extension().string());
  if (ext == ".csv") {
    if (spec.num_labels == 0) throw InvalidArgument("--labels is required for CSV");
    return LoadCsv(path, spec.num_labels);
  }
  if (ext == ".arff") {
    if (!spec.label_xml.empty()) return LoadArff(path, spec.label_xml);
    if (spec.num_labels == 0) {
      throw InvalidArgument("--labels or --label-xml is required for ARFF");
    }
    return LoadArff(path, spec.num_labels);
  }
  throw InvalidArgument("unrecognized dataset extension '" + ext + "'");
}

nlohmann::json ConfigJson(const ExperimentSpec& spec) {
  nlohmann::json j = spec.run.ToJson();
  j["num_labels"] = spec.num_labels;
  j["label_xml"] = spec.label_xml.string();
  j["test_fraction"] = spec.test_fraction;
  j["format"] = spec.format;
  return j;
}

void WriteJson(const std::filesystem::path& path, const nlohmann::json& j) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kIoError, "cannot write " + path.string());
  out << j.dump(2) << '\n';
}

std::string SixDigits(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

std::unique_ptr<std::ostream> OpenLog() {
  const char* level = std::getenv("FMLFS_LOG");
  if (level == nullptr) return nullptr;
  const std::string l = ToLower(level);
  if (l == "info" || l == "debug") {
    return std::make_unique<std::ostream>(std::cerr.rdbuf());
  }
  return nullptr;
}

struct Pipeline {
  MultiLabelDataset train;
  std::optional<MultiLabelDataset> test;
  PartitionPlan plan;
  std::vector<MultiLabelDataset> shards;
  RoundResult round;
};

Pipeline RunFederatedRanking(const ExperimentSpec& spec, bool hold_out_test,
                             RunLog& log) {
  Pipeline p;
  MultiLabelDataset data = LoadDataset(spec);
  if (hold_out_test) {
    auto [train, test] = SplitTrainTest(data, spec.test_fraction, spec.run.seed);
    p.train = std::move(train);
    p.test = std::move(test);
  } else {
    p.train = std::move(data);
  }
  p.plan = PartitionNonIid(p.train, spec.run.num_clients, spec.run.alpha,
                           spec.run.seed + kPartitionSeedOffset);
  p.shards = ApplyPartition(p.train, p.plan);
  p.round = RunRound(spec.run, p.shards, log);
  return p;
}

void WriteRankingOutputs(const ExperimentSpec& spec, const Pipeline& p,
                         std::string_view rows) {
  std::filesystem::create_directories(spec.output_dir);
  const nlohmann::json config = ConfigJson(spec);
  nlohmann::json plan = ToJson(p.plan);
  plan["rows"] = rows;
  plan["config"] = config;
  WriteJson(spec.output_dir / "partition.json", plan);
  nlohmann::json ranking = ToJson(p.round.ranking);
  ranking["config"] = config;
  WriteJson(spec.output_dir / "ranking.json", ranking);
  if (spec.debug_reports) {
    std::filesystem::create_directories(spec.output_dir / "reports");
    for (const auto& r : p.round.reports) {
      WriteJson(spec.output_dir / "reports" /
                    ("client_" + std::to_string(r.client_id) + ".json"),
                ToJson(r));
    }
    nlohmann::json stats = ToJson(Aggregate(p.round.reports, spec.run.weighting));
    stats["config"] = config;
    WriteJson(spec.output_dir / "reports" / "aggregated.json", stats);
  }
}

// One row per (dataset, top_k, metric), sorted by dataset then top_k.
struct MetricRow {
  std::string dataset;
  std::size_t top_k;
  std::string metric;
  double value;
};

void WriteMetricRows(std::vector<MetricRow> rows, std::ostream& out) {
  std::ranges::stable_sort(rows, [](const MetricRow& a, const MetricRow& b) {
    return std::tie(a.dataset, a.top_k) < std::tie(b.dataset, b.top_k);
  });
  out << "dataset,top_k,metric,value\n";
  for (const auto& r : rows) {
    out << r.dataset << ',' << r.top_k << ',' << r.metric << ','
        << SixDigits(r.value) << '\n';
  }
}

std::vector<MetricRow> RowsFromMetricsJson(const nlohmann::json& j,
                                           const std::string& origin) {
  if (!j.is_object() || j.value("schema", "") != kMetricsSchema) {
    throw DataError(origin + ": not a " + std::string(kMetricsSchema) + " file");
  }
  std::vector<MetricRow> rows;
  try {
    const std::string dataset = j.at("dataset").get<std::string>();
    const std::size_t k = j.at("top_k").get<std::size_t>();
    for (const auto& name : MetricNames()) {
      rows.push_back({dataset, k, name, j.at(name).get<double>()});
    }
  } catch (const nlohmann::json::exception& e) {
    throw DataError(origin + ": " + e.what());
  }
  return rows;
}

int CmdRun(const ExperimentSpec& spec_in, std::ostream& out) {
  ExperimentSpec spec = spec_in;
  spec.run.Validate();
  auto log_stream = OpenLog();
  RunLog log(log_stream.get());
  Pipeline p = RunFederatedRanking(spec, true, log);
  const std::size_t d = p.train.num_features();
  if (spec.run.top_k.empty()) spec.run.top_k = DefaultTopK(d);
  spec.run.Validate(d);
  WriteRankingOutputs(spec, p, "train");

  const nlohmann::json config = ConfigJson(spec);
  const std::string dataset = spec.run.dataset.stem().string();
  std::vector<MetricRow> rows;
  for (std::size_t k : spec.run.top_k) {
    // Clients reduce their shards and ship them to the server, which trains
    // the classifier on the union and scores the held-out test set.
    std::vector<MultiLabelDataset> reduced;
    for (const auto& shard : p.shards) {
      reduced.push_back(ApplyRanking(shard, p.round.ranking, k));
    }
    const MultiLabelDataset train = ConcatRows(reduced);
    const MultiLabelDataset test = ApplyRanking(*p.test, p.round.ranking, k);
    const MlknnModel model = FitMlknn(train, spec.run.knn_k);
    const MetricsReport metrics =
        Evaluate(test.labels, PredictMlknn(model, test));
    nlohmann::json j = ToJson(metrics);
    j["schema"] = kMetricsSchema;
    j["dataset"] = dataset;
    j["top_k"] = k;
    j["config"] = config;
    WriteJson(spec.output_dir / ("metrics_top" + std::to_string(k) + ".json"), j);
    auto r = RowsFromMetricsJson(j, "metrics");
    rows.insert(rows.end(), r.begin(), r.end());
    log.Emit("evaluated", std::nullopt, "top_k=" + std::to_string(k));
  }
  if (spec.format == "csv") {
    std::ofstream csv(spec.output_dir / "summary.csv");
    WriteMetricRows(rows, csv);
  }
  out << nlohmann::json{{"status", "ok"},
                        {"output_dir", spec.output_dir.string()},
                        {"top_k", spec.run.top_k}}
             .dump()
      << '\n';
  return kExitOk;
}

int CmdRank(const ExperimentSpec& spec, std::ostream& out) {
  spec.run.Validate();
  auto log_stream = OpenLog();
  RunLog log(log_stream.get());
  const Pipeline p = RunFederatedRanking(spec, false, log);
  WriteRankingOutputs(spec, p, "all");
  out << nlohmann::json{{"status", "ok"}, {"order", p.round.ranking.order}}.dump()
      << '\n';
  return kExitOk;
}

int CmdPartition(const ExperimentSpec& spec, const std::filesystem::path& dest,
                 std::ostream& out) {
  spec.run.Validate();
  const MultiLabelDataset data = LoadDataset(spec);
  const PartitionPlan plan =
      PartitionNonIid(data, spec.run.num_clients, spec.run.alpha,
                      spec.run.seed + kPartitionSeedOffset);
  nlohmann::json j = ToJson(plan);
  j["rows"] = "all";
  j["config"] = ConfigJson(spec);
  if (dest.empty()) {
    out << j.dump() << '\n';
  } else {
    if (dest.has_parent_path()) std::filesystem::create_directories(dest.parent_path());
    WriteJson(dest, j);
  }
  return kExitOk;
}

int CmdReport(const std::filesystem::path& dir, const std::filesystem::path& dest,
              std::ostream& out) {
  if (!std::filesystem::is_directory(dir)) {
    throw Error(ErrorCode::kIoError, dir.string() + " is not a directory");
  }
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    const std::string name = entry.path().filename().string();
    if (entry.is_regular_file() && name.starts_with("metrics_") &&
        entry.path().extension() == ".json") {
      files.push_back(entry.path());
    }
  }
  if (files.empty()) throw DataError("no metrics_*.json files in " + dir.string());
  std::ranges::sort(files);
  std::vector<MetricRow> rows;
  for (const auto& f : files) {
    std::ifstream in(f);
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
      throw DataError(f.string() + ": " + e.what());
    }
    auto r = RowsFromMetricsJson(j, f.string());
    rows.insert(rows.end(), r.begin(), r.end());
  }
  if (dest.empty()) {
    WriteMetricRows(std::move(rows), out);
  } else {
    std::ofstream file(dest);
    if (!file) throw Error(ErrorCode::kIoError, "cannot write " + dest.string());
    WriteMetricRows(std::move(rows), file);
  }
  return kExitOk;
}

void AddDataOptions(CLI::App* cmd, ExperimentSpec& spec) {
  cmd->add_option("--data", spec.run.dataset, "Dataset (.arff or .csv)")->required();
  cmd->add_option("--labels", spec.num_labels, "Number of trailing label columns");
  cmd->add_option("--label-xml", spec.label_xml, "Mulan XML label manifest");
  cmd->add_option("--clients", spec.run.num_clients, "Number of clients M (>= 2)")
      ->capture_default_str();
  cmd->add_option("--alpha", spec.run.alpha, "Dirichlet concentration")
      ->capture_default_str();
  cmd->add_option("--seed", spec.run.seed, "Seed for all randomness")
      ->capture_default_str();
}

void AddRoundOptions(CLI::App* cmd, ExperimentSpec& spec, std::string& transport,
                     long long& timeout_ms, bool& weighted) {
  cmd->add_option("--bins", spec.run.bins, "Equal-width bins per feature")
      ->capture_default_str();
  cmd->add_option("--transport", transport, "in-process or tcp:HOST:PORT")
      ->capture_default_str();
  cmd->add_option("--timeout-ms", timeout_ms, "Per-round client timeout")
      ->capture_default_str();
  cmd->add_flag("--weighted", weighted, "Weight the aggregate by shard size");
  cmd->add_option("--out", spec.output_dir, "Output directory")->capture_default_str();
  cmd->add_flag("--debug-reports", spec.debug_reports, "Also write client reports");
}

}  // namespace

int RunCli(const std::vector<std::string>& args, std::ostream& out,
           std::ostream& err) {
  CLI::App app{"Federated multi-label feature selection"};
  app.require_subcommand(1);

  ExperimentSpec spec;
  std::string transport = "in-process";
  std::string top_k_text;
  long long timeout_ms = spec.run.timeout.count();
  bool weighted = false;
  std::filesystem::path partition_out;
  std::filesystem::path report_dir;
  std::filesystem::path report_out;

  CLI::App* run = app.add_subcommand("run", "Rank features, then evaluate ML-kNN per top-k");
  AddDataOptions(run, spec);
  AddRoundOptions(run, spec, transport, timeout_ms, weighted);
  run->add_option("--k", spec.run.knn_k, "ML-kNN neighbour count")->capture_default_str();
  run->add_option("--top-k", top_k_text, "e.g. 10,20,...,100");
  run->add_option("--test-fraction", spec.test_fraction, "Held-out fraction")
      ->capture_default_str();
  run->add_option("--format", spec.format, "json or csv")
      ->check(CLI::IsMember({"json", "csv"}))
      ->capture_default_str();

  CLI::App* rank = app.add_subcommand("rank", "Run one federated ranking round");
  AddDataOptions(rank, spec);
  AddRoundOptions(rank, spec, transport, timeout_ms, weighted);

  CLI::App* partition = app.add_subcommand("partition", "Write a Non-IID partition plan");
  AddDataOptions(partition, spec);
  partition->add_option("--out", partition_out, "Output file (default stdout)");

  CLI::App* report = app.add_subcommand("report", "Tabulate metrics files as CSV");
  report->add_option("--dir", report_dir, "Directory of metrics_*.json")->required();
  report->add_option("--out", report_out, "Output CSV (default stdout)");

  const auto fail = [&](int code, std::string_view kind, const std::string& message) {
    err << nlohmann::json{{"error", {{"code", kind}, {"message", message}}}}.dump()
        << '\n';
    return code;
  };

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    return fail(kExitConfigError, "usage", e.what());
  }

  try {
    spec.run.transport = TransportConfig::Parse(transport);
    spec.run.timeout = std::chrono::milliseconds(timeout_ms);
    spec.run.weighting = weighted ? Weighting::kByInstances : Weighting::kUnweighted;
    if (!top_k_text.empty()) spec.run.top_k = ParseTopKList(top_k_text);
    if (*run) return CmdRun(spec, out);
    if (*rank) return CmdRank(spec, out);
    if (*partition) return CmdPartition(spec, partition_out, out);
    return CmdReport(report_dir, report_out, out);
  } catch (const Error& e) {
    return fail(e.code() == ErrorCode::kInvalidArgument ? kExitConfigError
                                                        : kExitRuntimeError,
                ErrorCodeName(e.code()), e.what());
  } catch (const std::exception& e) {
    return fail(kExitRuntimeError, "internal", e.what());
  }
}

}  // namespace fmlfs
