#pragma once

#include <chrono>
#include <functional>
#include <future>
#include <map>
#include <memory>
#include <mutex>
#include <thread>

#include <boost/asio/thread_pool.hpp>

#include "guided/session/relay.hpp"
#include "guided/session/session.hpp"

namespace guided::session {

using Sink = std::function<void(const ProtocolMessage&)>;

struct ManagerOptions {
  std::size_t threads = 4;
  std::chrono::milliseconds tick_period{1000};
  std::shared_ptr<Journal> journal;
  std::function<std::string()> next_session_id;
};

// Concurrent front of the session engine. Each session lives on its own
// strand: its messages and timer ticks are handled one at a time, in
// submission order, while distinct sessions run in parallel.
class SessionManager {
 public:
  SessionManager(std::shared_ptr<Pipeline> pipeline, ManagerOptions options = {});
  ~SessionManager();
  SessionManager(const SessionManager&) = delete;
  SessionManager& operator=(const SessionManager&) = delete;

  // Thread-safe. Replies (and later timer ticks for that session) go to
  // `sink`; the future carries the direct replies. `frames` needs only the
  // frames the message references.
  std::future<std::vector<ProtocolMessage>> submit(ProtocolMessage m, FrameStore frames, Sink sink);

  // Sessions rebuilt from the journal, if one is configured.
  std::size_t recover();
  std::size_t session_count() const;
  std::optional<nlohmann::json> fingerprint(const std::string& session_id);

 private:
  struct Slot;
  std::shared_ptr<Slot> make_slot();
  void after_handle(const std::shared_ptr<Slot>& slot);
  void schedule_tick(const std::shared_ptr<Slot>& slot, std::uint64_t generation, bool immediate);

  std::shared_ptr<Pipeline> pipeline_;
  ManagerOptions options_;
  boost::asio::thread_pool pool_;
  mutable std::mutex mu_;
  std::map<std::string, std::shared_ptr<Slot>> slots_;
  std::stop_source stop_;
};

// Copies of the frames a control message's snapshot reference names.
FrameStore referenced_frames(const ProtocolMessage& m, const FrameStore& frames);

// Server side of the relay path for one client: drains its uplink mailbox
// through an InboundStream into the manager and posts replies to the
// downlink mailbox.
class RelayBridge {
 public:
  RelayBridge(SessionManager& manager, Relay& relay, std::string client_id);
  ~RelayBridge();
  // One poll; returns the number of control messages submitted. Throws
  // Error(kRelayUnavailable).
  std::size_t pump(Clock::time_point now = Clock::now());
  void start(std::chrono::milliseconds period);  // background polling
  void stop();

 private:
  SessionManager& manager_;
  Relay& relay_;
  std::string client_id_;
  InboundStream inbound_;
  std::shared_ptr<std::mutex> send_mu_ = std::make_shared<std::mutex>();
  std::shared_ptr<FallbackSender> down_;
  std::future<std::vector<ProtocolMessage>> pending_query_;
  std::jthread poller_;
};

}  // namespace guided::session
