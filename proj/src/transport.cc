#include "fmlfs/transport.h"

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <functional>

#include "fmlfs/error.h"

namespace fmlfs {

// ---------------------------------------------------------------------------
// In-process transport.

class InProcessHub::Server : public ServerChannel {
 public:
  explicit Server(InProcessHub& hub) : hub_(hub) {}

  std::optional<ProtocolMessage> Receive(Clock::time_point deadline) override {
    return hub_.server_inbox_.Pop(deadline);
  }
  void SendTo(std::uint32_t client_id, const ProtocolMessage& msg) override {
    if (client_id >= hub_.client_inboxes_.size()) {
      throw ProtocolError("no in-process client " + std::to_string(client_id));
    }
    hub_.client_inboxes_[client_id]->Push(msg);
  }
  void Broadcast(const ProtocolMessage& msg) override {
    for (auto& inbox : hub_.client_inboxes_) inbox->Push(msg);
  }

 private:
  InProcessHub& hub_;
};

class InProcessHub::Client : public ClientChannel {
 public:
  Client(InProcessHub& hub, std::uint32_t id) : hub_(hub), id_(id) {}

  void Send(const ProtocolMessage& msg) override { hub_.server_inbox_.Push(msg); }
  std::optional<ProtocolMessage> Receive(Clock::time_point deadline) override {
    return hub_.client_inboxes_[id_]->Pop(deadline);
  }

 private:
  InProcessHub& hub_;
  std::uint32_t id_;
};

InProcessHub::InProcessHub(std::uint32_t num_clients)
    : server_(std::make_unique<Server>(*this)) {
  for (std::uint32_t i = 0; i < num_clients; ++i) {
    client_inboxes_.push_back(std::make_unique<MessageQueue<ProtocolMessage>>());
    clients_.push_back(std::make_unique<Client>(*this, i));
  }
}

InProcessHub::~InProcessHub() = default;

ServerChannel& InProcessHub::server() { return *server_; }

ClientChannel& InProcessHub::client(std::uint32_t id) {
  if (id >= clients_.size()) {
    throw InvalidArgument("no in-process client " + std::to_string(id));
  }
  return *clients_[id];
}

// ---------------------------------------------------------------------------
// Socket helpers.

namespace {

constexpr int kPollSliceMs = 50;

Error SocketError(const std::string& what) {
  return Error(ErrorCode::kIoError, what + ": " + std::strerror(errno));
}

addrinfo* Resolve(const std::string& host, std::uint16_t port, bool passive) {
  addrinfo hints{};
  hints.ai_family = AF_INET;
  hints.ai_socktype = SOCK_STREAM;
  if (passive) hints.ai_flags = AI_PASSIVE;
  addrinfo* result = nullptr;
  const std::string service = std::to_string(port);
  const int rc = getaddrinfo(host.empty() ? nullptr : host.c_str(),
                             service.c_str(), &hints, &result);
  if (rc != 0) {
    throw Error(ErrorCode::kIoError,
                "cannot resolve " + host + ": " + gai_strerror(rc));
  }
  return result;
}

// Waits until fd is readable. Returns false on timeout or when `keep_waiting`
// says to give up.
bool WaitReadable(int fd, Clock::time_point deadline,
                  const std::function<bool()>& keep_waiting) {
  while (keep_waiting()) {
    const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(
        deadline - Clock::now());
    if (left.count() <= 0) return false;
    pollfd p{fd, POLLIN, 0};
    const int rc = poll(&p, 1, static_cast<int>(std::min<long long>(left.count(), kPollSliceMs)));
    if (rc > 0) return true;
    if (rc < 0 && errno != EINTR) throw SocketError("poll");
  }
  return false;
}

enum class ReadStatus { kOk, kClosed, kTimeout };

ReadStatus ReadExact(int fd, char* buf, std::size_t n, Clock::time_point deadline,
                     const std::function<bool()>& keep_waiting) {
  std::size_t got = 0;
  while (got < n) {
    if (!WaitReadable(fd, deadline, keep_waiting)) return ReadStatus::kTimeout;
    const ssize_t r = recv(fd, buf + got, n - got, 0);
    if (r == 0) return ReadStatus::kClosed;
    if (r < 0) {
      if (errno == EINTR || errno == EAGAIN) continue;
      if (errno == ECONNRESET) return ReadStatus::kClosed;
      throw SocketError("recv");
    }
    got += static_cast<std::size_t>(r);
  }
  return ReadStatus::kOk;
}

void WriteAll(int fd, std::string_view data) {
  while (!data.empty()) {
    const ssize_t w = send(fd, data.data(), data.size(), MSG_NOSIGNAL);
    if (w < 0) {
      if (errno == EINTR) continue;
      throw SocketError("send");
    }
    data.remove_prefix(static_cast<std::size_t>(w));
  }
}

// Reads one frame. nullopt on clean close or timeout; `closed` tells which.
std::optional<ProtocolMessage> ReadFrame(int fd, Clock::time_point deadline,
                                         const std::function<bool()>& keep_waiting,
                                         bool* closed) {
  *closed = false;
  std::string header(kFrameHeaderBytes, '\0');
  ReadStatus st = ReadExact(fd, header.data(), header.size(), deadline, keep_waiting);
  if (st != ReadStatus::kOk) {
    *closed = st == ReadStatus::kClosed;
    return std::nullopt;
  }
  std::string body(DecodeFrameLength(header), '\0');
  st = ReadExact(fd, body.data(), body.size(), deadline, keep_waiting);
  if (st != ReadStatus::kOk) throw ProtocolError("connection dropped mid-frame");
  return DecodeFrameBody(body);
}

}  // namespace

// ---------------------------------------------------------------------------
// TCP server.

struct TcpServerChannel::Connection {
  int fd = -1;
  std::mutex write_mu;
};

TcpServerChannel::TcpServerChannel(const std::string& host, std::uint16_t port,
                                   std::uint32_t max_clients)
    : max_clients_(max_clients) {
  addrinfo* addr = Resolve(host, port, true);
  listen_fd_ = socket(addr->ai_family, addr->ai_socktype, addr->ai_protocol);
  if (listen_fd_ < 0) {
    freeaddrinfo(addr);
    throw SocketError("socket");
  }
  const int one = 1;
  setsockopt(listen_fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
  const int bound = bind(listen_fd_, addr->ai_addr, addr->ai_addrlen);
  freeaddrinfo(addr);
  if (bound < 0 || listen(listen_fd_, static_cast<int>(max_clients) + 4) < 0) {
    const Error err = SocketError("bind/listen on " + host + ":" + std::to_string(port));
    close(listen_fd_);
    throw err;
  }
  sockaddr_in local{};
  socklen_t len = sizeof(local);
  getsockname(listen_fd_, reinterpret_cast<sockaddr*>(&local), &len);
  port_ = ntohs(local.sin_port);
  acceptor_ = std::jthread([this](std::stop_token st) { AcceptLoop(st); });
}

TcpServerChannel::~TcpServerChannel() {
  acceptor_.request_stop();
  if (acceptor_.joinable()) acceptor_.join();
  std::vector<std::jthread> readers;
  {
    std::lock_guard lock(mu_);
    readers = std::move(readers_);
  }
  for (auto& r : readers) r.request_stop();
  readers.clear();  // joins
  for (auto& c : connections_) close(c->fd);
  close(listen_fd_);
}

void TcpServerChannel::AcceptLoop(std::stop_token stop) {
  std::uint32_t accepted = 0;
  while (!stop.stop_requested() && accepted < max_clients_) {
    pollfd p{listen_fd_, POLLIN, 0};
    const int rc = poll(&p, 1, kPollSliceMs);
    if (rc <= 0) continue;
    const int fd = accept(listen_fd_, nullptr, nullptr);
    if (fd < 0) continue;
    const int one = 1;
    setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
    auto conn = std::make_shared<Connection>();
    conn->fd = fd;
    std::lock_guard lock(mu_);
    const std::size_t index = connections_.size();
    connections_.push_back(conn);
    bound_client_.push_back(-1);
    readers_.emplace_back([this, index](std::stop_token st) { ReadLoop(st, index); });
    ++accepted;
  }
}

void TcpServerChannel::ReadLoop(std::stop_token stop, std::size_t index) {
  std::shared_ptr<Connection> conn;
  {
    std::lock_guard lock(mu_);
    conn = connections_[index];
  }
  const auto keep_waiting = [&] { return !stop.stop_requested(); };
  while (!stop.stop_requested()) {
    Inbound in{index, std::nullopt, {}};
    try {
      bool closed = false;
      in.message = ReadFrame(conn->fd, Clock::time_point::max(), keep_waiting, &closed);
      if (!in.message) {
        if (closed) in.error = "closed";
        else return;  // stop requested
      }
    } catch (const std::exception& e) {
      in.error = e.what();
    }
    const bool done = !in.error.empty();
    inbox_.Push(std::move(in));
    if (done) return;
  }
}

std::optional<ProtocolMessage> TcpServerChannel::Receive(Clock::time_point deadline) {
  while (true) {
    std::optional<Inbound> in = inbox_.Pop(deadline);
    if (!in) return std::nullopt;
    if (!in->message) {
      // A peer hanging up is not an error by itself; a missing report is
      // caught by the caller's deadline.
      if (in->error == "closed") continue;
      throw ProtocolError("bad frame from connection " +
                          std::to_string(in->connection) + ": " + in->error);
    }
    std::lock_guard lock(mu_);
    if (bound_client_[in->connection] < 0) {
      bound_client_[in->connection] = in->message->sender;
    }
    return std::move(in->message);
  }
}

void TcpServerChannel::SendTo(std::uint32_t client_id, const ProtocolMessage& msg) {
  const std::string frame = EncodeFrame(msg);
  std::shared_ptr<Connection> target;
  {
    std::lock_guard lock(mu_);
    for (std::size_t i = 0; i < connections_.size(); ++i) {
      if (bound_client_[i] == static_cast<std::int64_t>(client_id)) {
        target = connections_[i];
      }
    }
  }
  if (!target) throw ProtocolError("client " + std::to_string(client_id) + " is not connected");
  std::lock_guard lock(target->write_mu);
  WriteAll(target->fd, frame);
}

void TcpServerChannel::Broadcast(const ProtocolMessage& msg) {
  const std::string frame = EncodeFrame(msg);
  std::vector<std::shared_ptr<Connection>> targets;
  {
    std::lock_guard lock(mu_);
    targets = connections_;
  }
  for (auto& c : targets) {
    std::lock_guard lock(c->write_mu);
    try {
      WriteAll(c->fd, frame);
    } catch (const Error&) {
      // Peer already gone; nothing left to tell it.
    }
  }
}

// ---------------------------------------------------------------------------
// TCP client.

TcpClientChannel::TcpClientChannel(const std::string& host, std::uint16_t port,
                                   Clock::time_point deadline) {
  while (true) {
    addrinfo* addr = Resolve(host, port, false);
    fd_ = socket(addr->ai_family, addr->ai_socktype, addr->ai_protocol);
    if (fd_ < 0) {
      freeaddrinfo(addr);
      throw SocketError("socket");
    }
    const int rc = connect(fd_, addr->ai_addr, addr->ai_addrlen);
    freeaddrinfo(addr);
    if (rc == 0) break;
    close(fd_);
    fd_ = -1;
    if (Clock::now() >= deadline) {
      throw Error(ErrorCode::kTimeout,
                  "cannot connect to " + host + ":" + std::to_string(port));
    }
    std::this_thread::sleep_for(std::chrono::milliseconds(kPollSliceMs));
  }
  const int one = 1;
  setsockopt(fd_, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
}

TcpClientChannel::~TcpClientChannel() {
  if (fd_ >= 0) close(fd_);
}

void TcpClientChannel::Send(const ProtocolMessage& msg) {
  WriteAll(fd_, EncodeFrame(msg));
}

std::optional<ProtocolMessage> TcpClientChannel::Receive(Clock::time_point deadline) {
  bool closed = false;
  auto msg = ReadFrame(fd_, deadline, [] { return true; }, &closed);
  if (!msg && closed) throw ProtocolError("server closed the connection");
  return msg;
}

}  // namespace fmlfs
