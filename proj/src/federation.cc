#include "fmlfs/federation.h"

#include <charconv>
#include <exception>
#include <future>
#include <map>
#include <ostream>

#include "fmlfs/error.h"

namespace fmlfs {

TransportConfig TransportConfig::Parse(std::string_view text) {
  TransportConfig cfg;
  if (text == "in-process" || text == "inprocess") return cfg;
  if (!text.starts_with("tcp:")) {
    throw InvalidArgument("transport must be 'in-process' or 'tcp:HOST:PORT'");
  }
  const std::string_view rest = text.substr(4);
  const std::size_t colon = rest.rfind(':');
  if (colon == std::string_view::npos || colon == 0) {
    throw InvalidArgument("tcp transport needs HOST:PORT");
  }
  unsigned port = 0;
  const std::string_view port_text = rest.substr(colon + 1);
  const auto [ptr, ec] =
      std::from_chars(port_text.data(), port_text.data() + port_text.size(), port);
  if (ec != std::errc() || ptr != port_text.data() + port_text.size() || port > 65535) {
    throw InvalidArgument("invalid tcp port '" + std::string(port_text) + "'");
  }
  cfg.kind = Kind::kTcp;
  cfg.host = std::string(rest.substr(0, colon));
  cfg.port = static_cast<std::uint16_t>(port);
  return cfg;
}

std::string TransportConfig::ToString() const {
  if (kind == Kind::kInProcess) return "in-process";
  return "tcp:" + host + ":" + std::to_string(port);
}

void RunConfig::Validate(std::optional<std::size_t> num_features) const {
  if (num_clients < 2) throw InvalidArgument("at least 2 clients are required");
  if (bins < 2) throw InvalidArgument("bin count must be at least 2");
  if (knn_k < 1) throw InvalidArgument("knn k must be at least 1");
  if (!(alpha > 0)) throw InvalidArgument("dirichlet alpha must be positive");
  if (timeout.count() <= 0) throw InvalidArgument("timeout must be positive");
  for (std::size_t k : top_k) {
    if (k < 1 || (num_features && k > *num_features)) {
      throw InvalidArgument("top-k value " + std::to_string(k) + " is out of range");
    }
  }
}

nlohmann::json RunConfig::ToJson() const {
  return {{"num_clients", num_clients},
          {"bins", bins},
          {"alpha", alpha},
          {"seed", seed},
          {"top_k", top_k},
          {"dataset", dataset.string()},
          {"knn_k", knn_k},
          {"transport", transport.ToString()},
          {"timeout_ms", timeout.count()},
          {"weighting",
           weighting == Weighting::kUnweighted ? "unweighted" : "by-instances"}};
}

void RunLog::Emit(std::string_view event, std::optional<std::uint32_t> client_id,
                  std::string_view detail) {
  if (out_ == nullptr) return;
  const auto now = std::chrono::duration_cast<std::chrono::milliseconds>(
      std::chrono::system_clock::now().time_since_epoch());
  nlohmann::json line = {{"event", event}, {"timestamp", now.count()}};
  line["client_id"] = client_id ? nlohmann::json(*client_id) : nlohmann::json(nullptr);
  if (!detail.empty()) line["detail"] = detail;
  std::lock_guard lock(mu_);
  *out_ << line.dump() << '\n';
  out_->flush();
}

namespace {

ProtocolMessage AbortMessage(std::uint32_t sender, std::string reason) {
  return {sender, kSchemaVersion, AbortNotice{std::move(reason)}};
}

}  // namespace

FeatureRanking ServeRound(ServerChannel& channel, std::uint32_t num_clients,
                          std::chrono::milliseconds timeout, Weighting weighting,
                          RunLog& log, std::vector<ClientReport>* collected) {
  if (num_clients < 2) throw InvalidArgument("at least 2 clients are required");
  const auto deadline = Clock::now() + timeout;
  std::map<std::uint32_t, ClientReport> reports;

  const auto fail = [&](ErrorCode code, const std::string& reason) {
    log.Emit("abort", std::nullopt, reason);
    channel.Broadcast(AbortMessage(kServerId, reason));
    throw Error(code, reason);
  };

  while (reports.size() < num_clients) {
    std::optional<ProtocolMessage> msg;
    try {
      msg = channel.Receive(deadline);
    } catch (const Error& e) {
      fail(ErrorCode::kProtocolError, e.what());
    }
    if (!msg) {
      std::string missing;
      for (std::uint32_t c = 0; c < num_clients; ++c) {
        if (!reports.contains(c)) missing += (missing.empty() ? "" : ",") + std::to_string(c);
      }
      fail(ErrorCode::kTimeout, "timed out with " + std::to_string(reports.size()) +
                                    " of " + std::to_string(num_clients) +
                                    " reports; missing clients " + missing);
    }
    const std::string who = "client " + std::to_string(msg->sender);
    if (msg->schema_version != kSchemaVersion) {
      fail(ErrorCode::kProtocolError, who + " speaks schema version " +
                                          std::to_string(msg->schema_version));
    }
    if (msg->is_abort()) {
      fail(ErrorCode::kProtocolError,
           who + " aborted: " + std::get<AbortNotice>(msg->body).reason);
    }
    if (!msg->is_report()) {
      fail(ErrorCode::kProtocolError,
           "unexpected " + std::string(MessageType(*msg)) + " message from " + who);
    }
    ClientReport& report = std::get<ClientReport>(msg->body);
    if (report.client_id != msg->sender) {
      fail(ErrorCode::kProtocolError, who + " sent a report labelled client " +
                                          std::to_string(report.client_id));
    }
    if (report.client_id >= num_clients) {
      fail(ErrorCode::kProtocolError, who + " is not part of this round");
    }
    if (reports.contains(report.client_id)) {
      fail(ErrorCode::kProtocolError, "duplicate report from " + who);
    }
    try {
      report.Validate();
    } catch (const Error& e) {
      fail(ErrorCode::kDataError, "invalid report from " + who + ": " + e.what());
    }
    if (!reports.empty()) {
      const ClientReport& first = reports.begin()->second;
      if (report.num_features() != first.num_features() ||
          report.num_labels() != first.num_labels()) {
        fail(ErrorCode::kDataError,
             "dimension mismatch from " + who + ": " +
                 std::to_string(report.num_features()) + "x" +
                 std::to_string(report.num_labels()) + " vs " +
                 std::to_string(first.num_features()) + "x" +
                 std::to_string(first.num_labels()));
      }
    }
    log.Emit("report_received", report.client_id);
    reports.emplace(report.client_id, std::move(report));
  }

  std::vector<ClientReport> ordered;
  for (auto& [id, r] : reports) ordered.push_back(std::move(r));
  const AggregatedStats stats = Aggregate(ordered, weighting);
  const FeatureRanking ranking = RankFeatures(Objectives(stats));
  log.Emit("ranked", std::nullopt,
           "features=" + std::to_string(ranking.num_features()));

  const ProtocolMessage reply{kServerId, kSchemaVersion, ranking};
  for (const auto& r : ordered) {
    channel.SendTo(r.client_id, reply);
    log.Emit("ranking_sent", r.client_id);
  }
  if (collected) *collected = std::move(ordered);
  return ranking;
}

FeatureRanking RunClient(ClientChannel& channel, const MultiLabelDataset& shard,
                         std::uint32_t client_id, std::size_t bins,
                         std::chrono::milliseconds timeout, RunLog& log) {
  ClientReport report;
  try {
    report = ComputeLocalReport(Discretize(shard, bins), client_id);
  } catch (const Error& e) {
    channel.Send(AbortMessage(client_id, e.what()));
    throw;
  }
  channel.Send({client_id, kSchemaVersion, std::move(report)});
  log.Emit("report_sent", client_id);

  const std::optional<ProtocolMessage> reply = channel.Receive(Clock::now() + timeout);
  if (!reply) {
    throw Error(ErrorCode::kTimeout,
                "client " + std::to_string(client_id) + " got no reply from the server");
  }
  if (reply->is_abort()) {
    throw Error(ErrorCode::kProtocolError,
                "server aborted the round: " + std::get<AbortNotice>(reply->body).reason);
  }
  if (!reply->is_ranking()) {
    throw ProtocolError("client " + std::to_string(client_id) +
                        " received an unexpected " + std::string(MessageType(*reply)));
  }
  FeatureRanking ranking = std::get<FeatureRanking>(reply->body);
  if (ranking.num_features() != shard.num_features()) {
    throw ProtocolError("ranking does not match the local feature count");
  }
  log.Emit("ranking_received", client_id);
  return ranking;
}

RoundResult RunRound(const RunConfig& config,
                     std::span<const MultiLabelDataset> shards, RunLog& log) {
  config.Validate();
  if (shards.size() != config.num_clients) {
    throw InvalidArgument("expected " + std::to_string(config.num_clients) +
                          " shards, got " + std::to_string(shards.size()));
  }
  for (std::size_t m = 0; m < shards.size(); ++m) {
    if (shards[m].num_instances() == 0) {
      throw InvalidArgument("shard " + std::to_string(m) + " is empty");
    }
  }
  log.Emit("round_start", std::nullopt, config.transport.ToString());

  RoundResult result;
  std::future<FeatureRanking> server;
  std::vector<std::future<FeatureRanking>> clients;
  const std::uint32_t m = config.num_clients;

  std::optional<InProcessHub> hub;
  std::optional<TcpServerChannel> tcp;
  if (config.transport.kind == TransportConfig::Kind::kInProcess) {
    hub.emplace(m);
    server = std::async(std::launch::async, [&] {
      return ServeRound(hub->server(), m, config.timeout, config.weighting, log,
                        &result.reports);
    });
    for (std::uint32_t id = 0; id < m; ++id) {
      clients.push_back(std::async(std::launch::async, [&, id] {
        return RunClient(hub->client(id), shards[id], id, config.bins,
                         config.timeout, log);
      }));
    }
  } else {
    tcp.emplace(config.transport.host, config.transport.port, m);
    const std::uint16_t port = tcp->port();
    server = std::async(std::launch::async, [&] {
      return ServeRound(*tcp, m, config.timeout, config.weighting, log,
                        &result.reports);
    });
    for (std::uint32_t id = 0; id < m; ++id) {
      clients.push_back(std::async(std::launch::async, [&, id, port] {
        TcpClientChannel channel(config.transport.host, port,
                                 Clock::now() + config.timeout);
        return RunClient(channel, shards[id], id, config.bins, config.timeout, log);
      }));
    }
  }

  // Barrier: every task finishes before the channels go away.
  std::exception_ptr server_error;
  try {
    result.ranking = server.get();
  } catch (...) {
    server_error = std::current_exception();
  }
  std::exception_ptr client_error;
  std::vector<FeatureRanking> delivered;
  for (auto& c : clients) {
    try {
      delivered.push_back(c.get());
    } catch (...) {
      if (!client_error) client_error = std::current_exception();
    }
  }
  if (server_error) std::rethrow_exception(server_error);
  if (client_error) std::rethrow_exception(client_error);
  for (const auto& r : delivered) {
    if (!(r == result.ranking)) {
      throw ProtocolError("a client received a ranking different from the server's");
    }
  }
  log.Emit("round_complete");
  return result;
}

}  // namespace fmlfs
