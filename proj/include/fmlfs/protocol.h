#ifndef FMLFS_PROTOCOL_H_
#define FMLFS_PROTOCOL_H_

#include <cstdint>
#include <limits>
#include <string>
#include <string_view>
#include <variant>

#include "fmlfs/client.h"
#include "fmlfs/pareto.h"
#include "json.hpp"

namespace fmlfs {

inline constexpr std::uint32_t kServerId = std::numeric_limits<std::uint32_t>::max();

struct AbortNotice {
  std::string reason;
};

// Report flows client -> server; Ranking and Abort flow server -> client
// (a client may also send Abort if its local phase fails).
struct ProtocolMessage {
  std::uint32_t sender = 0;
  std::uint32_t schema_version = kSchemaVersion;
  std::variant<ClientReport, FeatureRanking, AbortNotice> body;

  bool is_report() const { return std::holds_alternative<ClientReport>(body); }
  bool is_ranking() const { return std::holds_alternative<FeatureRanking>(body); }
  bool is_abort() const { return std::holds_alternative<AbortNotice>(body); }
};

std::string_view MessageType(const ProtocolMessage& msg);

nlohmann::json ToJson(const ProtocolMessage& msg);
ProtocolMessage ProtocolMessageFromJson(const nlohmann::json& j);

inline constexpr std::size_t kFrameHeaderBytes = 4;
inline constexpr std::uint32_t kMaxFrameBytes = 1u << 30;

// 4-byte big-endian body length followed by the JSON body.
std::string EncodeFrame(const ProtocolMessage& msg);
std::uint32_t DecodeFrameLength(std::string_view header);
ProtocolMessage DecodeFrameBody(std::string_view body);

}  // namespace fmlfs

#endif  // FMLFS_PROTOCOL_H_
