#ifndef FMLFS_FEDERATION_H_
#define FMLFS_FEDERATION_H_

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fmlfs/client.h"
#include "fmlfs/dataset.h"
#include "fmlfs/pareto.h"
#include "fmlfs/server.h"
#include "fmlfs/transport.h"
#include "json.hpp"

namespace fmlfs {

struct TransportConfig {
  enum class Kind { kInProcess, kTcp };
  Kind kind = Kind::kInProcess;
  std::string host = "127.0.0.1";
  std::uint16_t port = 0;  // 0 picks a free port

  // "in-process" or "tcp:HOST:PORT".
  static TransportConfig Parse(std::string_view text);
  std::string ToString() const;
};

struct RunConfig {
  std::uint32_t num_clients = 10;
  std::size_t bins = kDefaultBins;
  double alpha = 0.5;
  std::uint64_t seed = 42;
  std::vector<std::size_t> top_k;
  std::filesystem::path dataset;
  std::size_t knn_k = 10;
  TransportConfig transport;
  std::chrono::milliseconds timeout{60'000};
  Weighting weighting = Weighting::kUnweighted;

  // Throws InvalidArgument. top_k entries are checked when D is known.
  void Validate(std::optional<std::size_t> num_features = std::nullopt) const;
  nlohmann::json ToJson() const;
};

// JSON-lines event log: {"event", "timestamp", "client_id"}. Thread-safe; a
// null stream discards everything.
class RunLog {
 public:
  explicit RunLog(std::ostream* out = nullptr) : out_(out) {}
  void Emit(std::string_view event, std::optional<std::uint32_t> client_id = {},
            std::string_view detail = {});

 private:
  std::mutex mu_;
  std::ostream* out_;
};

// Server half of one round: waits for exactly one report from each of the
// `num_clients` clients, aggregates, ranks and broadcasts the ranking. On a
// timeout or protocol violation every peer is sent Abort and an Error is
// thrown; no ranking leaves the server in that case.
FeatureRanking ServeRound(ServerChannel& channel, std::uint32_t num_clients,
                          std::chrono::milliseconds timeout, Weighting weighting,
                          RunLog& log,
                          std::vector<ClientReport>* collected = nullptr);

// Client half: discretize locally, report, wait for the ranking.
FeatureRanking RunClient(ClientChannel& channel, const MultiLabelDataset& shard,
                         std::uint32_t client_id, std::size_t bins,
                         std::chrono::milliseconds timeout, RunLog& log);

struct RoundResult {
  FeatureRanking ranking;
  std::vector<ClientReport> reports;  // ascending client id
};

// One FMLFS round with M concurrent clients and one server over the
// configured transport. shards[m] belongs to client m.
RoundResult RunRound(const RunConfig& config,
                     std::span<const MultiLabelDataset> shards, RunLog& log);

}  // namespace fmlfs

#endif  // FMLFS_FEDERATION_H_
