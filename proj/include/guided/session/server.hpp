#pragma once

#include <memory>
#include <optional>
#include <string>
#include <thread>
#include <variant>
#include <vector>

#include "guided/session/manager.hpp"

namespace guided::session {

struct ServerOptions {
  std::string address = "127.0.0.1";
  unsigned short port = 0;  // 0 picks a free port
  std::size_t io_threads = 1;
};

// gr/1 over WebSocket: text messages carry control documents, binary
// messages carry frames. One FrameStore per connection.
class GuidanceServer {
 public:
  GuidanceServer(SessionManager& manager, ServerOptions options);
  ~GuidanceServer();
  GuidanceServer(const GuidanceServer&) = delete;
  GuidanceServer& operator=(const GuidanceServer&) = delete;

  void start();
  void stop();
  unsigned short port() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

using Incoming = std::variant<ProtocolMessage, BinaryFrame>;

// Blocking client, for tools and tests. Also a Link, so it can front a
// FallbackSender.
class GuidanceClient : public Link {
 public:
  GuidanceClient();
  ~GuidanceClient() override;

  // Throws Error(kRelayUnavailable) when the server cannot be reached.
  void connect(const std::string& host, unsigned short port);
  void close();
  bool connected() const override;
  void send(const Envelope& e) override;
  void send_message(const ProtocolMessage& m);
  void send_frame(const BinaryFrame& f);
  // nullopt on timeout; a later call resumes the same read.
  std::optional<ProtocolMessage> receive(std::chrono::milliseconds timeout);

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace guided::session
