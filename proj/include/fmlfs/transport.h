#ifndef FMLFS_TRANSPORT_H_
#define FMLFS_TRANSPORT_H_

#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "fmlfs/protocol.h"

namespace fmlfs {

using Clock = std::chrono::steady_clock;

// Unbounded multi-producer queue with deadline-aware pop.
template <typename T>
class MessageQueue {
 public:
  void Push(T value) {
    {
      std::lock_guard lock(mu_);
      items_.push_back(std::move(value));
    }
    cv_.notify_one();
  }

  std::optional<T> Pop(Clock::time_point deadline) {
    std::unique_lock lock(mu_);
    if (!cv_.wait_until(lock, deadline, [&] { return !items_.empty(); })) {
      return std::nullopt;
    }
    T value = std::move(items_.front());
    items_.pop_front();
    return value;
  }

 private:
  std::mutex mu_;
  std::condition_variable cv_;
  std::deque<T> items_;
};

// Server side of a transport.
class ServerChannel {
 public:
  virtual ~ServerChannel() = default;
  // Next inbound message, or nullopt once the deadline passes. Transport
  // failures (bad frame, broken peer) surface as ProtocolError.
  virtual std::optional<ProtocolMessage> Receive(Clock::time_point deadline) = 0;
  virtual void SendTo(std::uint32_t client_id, const ProtocolMessage& msg) = 0;
  // Delivers to every peer the transport knows about.
  virtual void Broadcast(const ProtocolMessage& msg) = 0;
};

class ClientChannel {
 public:
  virtual ~ClientChannel() = default;
  virtual void Send(const ProtocolMessage& msg) = 0;
  virtual std::optional<ProtocolMessage> Receive(Clock::time_point deadline) = 0;
};

// Message passing between threads of one process.
class InProcessHub {
 public:
  explicit InProcessHub(std::uint32_t num_clients);
  ~InProcessHub();

  ServerChannel& server();
  ClientChannel& client(std::uint32_t id);

 private:
  class Server;
  class Client;
  MessageQueue<ProtocolMessage> server_inbox_;
  std::vector<std::unique_ptr<MessageQueue<ProtocolMessage>>> client_inboxes_;
  std::unique_ptr<Server> server_;
  std::vector<std::unique_ptr<Client>> clients_;
};

// Length-prefixed JSON frames over TCP. The server accepts up to
// `max_clients` connections; a connection is bound to a client id by the
// sender field of the first message that arrives on it.
class TcpServerChannel : public ServerChannel {
 public:
  TcpServerChannel(const std::string& host, std::uint16_t port,
                   std::uint32_t max_clients);
  ~TcpServerChannel() override;

  std::uint16_t port() const { return port_; }

  std::optional<ProtocolMessage> Receive(Clock::time_point deadline) override;
  void SendTo(std::uint32_t client_id, const ProtocolMessage& msg) override;
  void Broadcast(const ProtocolMessage& msg) override;

 private:
  struct Connection;
  struct Inbound {
    std::size_t connection = 0;
    std::optional<ProtocolMessage> message;  // empty on read failure
    std::string error;
  };

  void AcceptLoop(std::stop_token stop);
  void ReadLoop(std::stop_token stop, std::size_t index);

  int listen_fd_ = -1;
  std::uint16_t port_ = 0;
  std::uint32_t max_clients_;
  std::mutex mu_;
  std::vector<std::shared_ptr<Connection>> connections_;
  std::vector<std::int64_t> bound_client_;  // per connection, -1 if unbound
  MessageQueue<Inbound> inbox_;
  std::vector<std::jthread> readers_;
  std::jthread acceptor_;
};

class TcpClientChannel : public ClientChannel {
 public:
  // Retries the connection until `deadline`.
  TcpClientChannel(const std::string& host, std::uint16_t port,
                   Clock::time_point deadline);
  ~TcpClientChannel() override;

  void Send(const ProtocolMessage& msg) override;
  std::optional<ProtocolMessage> Receive(Clock::time_point deadline) override;

 private:
  int fd_ = -1;
};

}  // namespace fmlfs

#endif  // FMLFS_TRANSPORT_H_
