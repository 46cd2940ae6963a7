#include "fmlfs/protocol.h"

#include <string>

#include "fmlfs/error.h"

namespace fmlfs {

std::string_view MessageType(const ProtocolMessage& msg) {
  if (msg.is_report()) return "report";
  if (msg.is_ranking()) return "ranking";
  return "abort";
}

nlohmann::json ToJson(const ProtocolMessage& msg) {
  nlohmann::json j = {{"schema_version", msg.schema_version},
                      {"sender", msg.sender},
                      {"type", MessageType(msg)}};
  if (const auto* report = std::get_if<ClientReport>(&msg.body)) {
    j["report"] = ToJson(*report);
  } else if (const auto* ranking = std::get_if<FeatureRanking>(&msg.body)) {
    j["ranking"] = ToJson(*ranking);
  } else {
    j["reason"] = std::get<AbortNotice>(msg.body).reason;
  }
  return j;
}

ProtocolMessage ProtocolMessageFromJson(const nlohmann::json& j) {
  ProtocolMessage msg;
  std::string type;
  try {
    msg.schema_version = j.at("schema_version").get<std::uint32_t>();
    msg.sender = j.at("sender").get<std::uint32_t>();
    type = j.at("type").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw ProtocolError(std::string("malformed protocol message: ") + e.what());
  }
  if (msg.schema_version != kSchemaVersion) {
    throw ProtocolError("protocol schema version " +
                        std::to_string(msg.schema_version) + " is not supported");
  }
  if (type == "report") {
    msg.body = ClientReportFromJson(j.at("report"));
  } else if (type == "ranking") {
    msg.body = FeatureRankingFromJson(j.at("ranking"));
  } else if (type == "abort") {
    msg.body = AbortNotice{j.value("reason", std::string())};
  } else {
    throw ProtocolError("unknown protocol message type '" + type + "'");
  }
  return msg;
}

std::string EncodeFrame(const ProtocolMessage& msg) {
  const std::string body = ToJson(msg).dump();
  if (body.size() > kMaxFrameBytes) throw ProtocolError("message too large to frame");
  const auto len = static_cast<std::uint32_t>(body.size());
  std::string frame;
  frame.reserve(kFrameHeaderBytes + body.size());
  frame.push_back(static_cast<char>((len >> 24) & 0xff));
  frame.push_back(static_cast<char>((len >> 16) & 0xff));
  frame.push_back(static_cast<char>((len >> 8) & 0xff));
  frame.push_back(static_cast<char>(len & 0xff));
  frame += body;
  return frame;
}

std::uint32_t DecodeFrameLength(std::string_view header) {
  if (header.size() != kFrameHeaderBytes) throw ProtocolError("short frame header");
  std::uint32_t len = 0;
  for (char c : header) len = (len << 8) | static_cast<unsigned char>(c);
  if (len > kMaxFrameBytes) throw ProtocolError("frame length exceeds limit");
  return len;
}

ProtocolMessage DecodeFrameBody(std::string_view body) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(body);
  } catch (const nlohmann::json::parse_error& e) {
    throw ProtocolError(std::string("frame body is not JSON: ") + e.what());
  }
  return ProtocolMessageFromJson(j);
}

}  // namespace fmlfs
