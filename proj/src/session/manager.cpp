#include "guided/session/manager.hpp"

#include <boost/asio/post.hpp>
#include <boost/asio/steady_timer.hpp>
#include <boost/asio/strand.hpp>
#include <spdlog/spdlog.h>

namespace guided::session {

namespace asio = boost::asio;

struct SessionManager::Slot {
  explicit Slot(asio::strand<asio::thread_pool::executor_type> s, std::shared_ptr<Pipeline> pipeline,
                EngineOptions options)
      : strand(std::move(s)), engine(std::move(pipeline), std::move(options)), timer(strand) {}

  asio::strand<asio::thread_pool::executor_type> strand;
  SessionEngine engine;  // holds exactly one session once created
  std::string session_id;
  Sink sink;
  asio::steady_timer timer;
  std::uint64_t scheduled_generation = 0;
};

FrameStore referenced_frames(const ProtocolMessage& m, const FrameStore& frames) {
  FrameStore out;
  if (!m.payload.contains("snapshot") || !m.payload.at("snapshot").is_object()) return out;
  const auto& ref = m.payload.at("snapshot");
  const auto copy = [&](const char* field, FrameKind kind) {
    if (!ref.contains(field) || !ref.at(field).is_string()) return;
    try {
      out.put(frames.get(ref.at(field).get<std::string>(), kind));
    } catch (const Error&) {
      // reported when the snapshot is resolved
    }
  };
  copy("image", FrameKind::kPng);
  copy("depth", FrameKind::kDepthF32);
  return out;
}

SessionManager::SessionManager(std::shared_ptr<Pipeline> pipeline, ManagerOptions options)
    : pipeline_(std::move(pipeline)), options_(std::move(options)), pool_(options_.threads) {}

SessionManager::~SessionManager() {
  stop_.request_stop();
  {
    std::lock_guard lock(mu_);
    for (auto& [id, slot] : slots_) {
      asio::post(slot->strand, [slot] { slot->timer.cancel(); });
    }
  }
  pool_.join();
}

std::shared_ptr<SessionManager::Slot> SessionManager::make_slot() {
  EngineOptions eo;
  eo.journal = options_.journal;
  eo.next_session_id = options_.next_session_id;
  return std::make_shared<Slot>(asio::make_strand(pool_.get_executor()), pipeline_, std::move(eo));
}

std::future<std::vector<ProtocolMessage>> SessionManager::submit(ProtocolMessage m, FrameStore frames, Sink sink) {
  auto promise = std::make_shared<std::promise<std::vector<ProtocolMessage>>>();
  auto future = promise->get_future();

  std::shared_ptr<Slot> slot;
  if (m.kind == MessageKind::kQuery) {
    slot = make_slot();
  } else {
    std::lock_guard lock(mu_);
    const auto it = slots_.find(m.session_id);
    if (it != slots_.end()) slot = it->second;
  }
  if (!slot) {
    std::vector<ProtocolMessage> replies{
        error_message(m.session_id, Error(ErrorCode::kUnknownSession, "no session " + m.session_id))};
    if (sink) sink(replies.front());
    promise->set_value(std::move(replies));
    return future;
  }

  asio::post(slot->strand, [this, slot, m = std::move(m), frames = std::move(frames), sink = std::move(sink),
                            promise]() mutable {
    std::vector<ProtocolMessage> replies;
    try {
      replies = slot->engine.handle(m, frames, stop_.get_token());
      if (sink) slot->sink = sink;
      if (m.kind == MessageKind::kQuery) {
        const auto ids = slot->engine.session_ids();
        if (!ids.empty()) {
          slot->session_id = ids.front();
          std::lock_guard lock(mu_);
          slots_.emplace(slot->session_id, slot);
        }
      }
      for (const auto& r : replies) {
        if (slot->sink) slot->sink(r);
      }
      after_handle(slot);
    } catch (const std::exception& e) {
      spdlog::error("session {}: {}", slot->session_id, e.what());
    }
    promise->set_value(std::move(replies));
  });
  return future;
}

void SessionManager::after_handle(const std::shared_ptr<Slot>& slot) {
  const SessionState* s = slot->engine.find(slot->session_id);
  if (s == nullptr || stop_.stop_requested()) return;
  if (!s->timer) {
    if (slot->scheduled_generation != 0) slot->timer.cancel();
    slot->scheduled_generation = 0;
    return;
  }
  if (s->timer->generation != slot->scheduled_generation) {
    slot->scheduled_generation = s->timer->generation;
    schedule_tick(slot, s->timer->generation, true);
  }
}

void SessionManager::schedule_tick(const std::shared_ptr<Slot>& slot, std::uint64_t generation, bool immediate) {
  slot->timer.expires_after(immediate ? std::chrono::milliseconds(0) : options_.tick_period);
  slot->timer.async_wait([this, slot, generation](const boost::system::error_code& ec) {
    if (ec || stop_.stop_requested() || slot->scheduled_generation != generation) return;
    const auto tick = slot->engine.tick(slot->session_id, generation);
    if (!tick) return;
    if (slot->sink) slot->sink(*tick);
    if (tick->payload.at("expired").get<bool>()) {
      slot->scheduled_generation = 0;
      return;
    }
    schedule_tick(slot, generation, false);
  });
}

std::size_t SessionManager::recover() {
  if (!options_.journal) return 0;
  std::size_t n = 0;
  for (auto& state : options_.journal->recover()) {
    auto slot = make_slot();
    slot->session_id = state.session_id;
    slot->engine.restore(std::move(state));
    std::lock_guard lock(mu_);
    slots_.insert_or_assign(slot->session_id, slot);
    ++n;
  }
  return n;
}

std::size_t SessionManager::session_count() const {
  std::lock_guard lock(mu_);
  return slots_.size();
}

std::optional<nlohmann::json> SessionManager::fingerprint(const std::string& session_id) {
  std::shared_ptr<Slot> slot;
  {
    std::lock_guard lock(mu_);
    const auto it = slots_.find(session_id);
    if (it == slots_.end()) return std::nullopt;
    slot = it->second;
  }
  std::promise<nlohmann::json> p;
  auto f = p.get_future();
  asio::post(slot->strand, [&] { p.set_value(slot->engine.find(session_id)->fingerprint()); });
  return f.get();
}

RelayBridge::RelayBridge(SessionManager& manager, Relay& relay, std::string client_id)
    : manager_(manager),
      relay_(relay),
      client_id_(std::move(client_id)),
      down_(std::make_shared<FallbackSender>(nullptr, &relay, downlink_mailbox(client_id_))) {}

RelayBridge::~RelayBridge() { stop(); }

std::size_t RelayBridge::pump(Clock::time_point now) {
  std::vector<ProtocolMessage> ready;
  for (auto& e : relay_.poll(uplink_mailbox(client_id_))) {
    try {
      for (auto& m : inbound_.accept(std::move(e), now)) ready.push_back(std::move(m));
    } catch (const Error& err) {
      spdlog::warn("relay {}: {}", client_id_, err.what());
    }
  }
  for (auto& m : inbound_.expire(now)) ready.push_back(std::move(m));
  for (auto& m : ready) {
    // Later messages may name the session a query is still creating.
    if (pending_query_.valid()) pending_query_.wait();
    const bool creates = m.kind == MessageKind::kQuery;
    FrameStore frames = referenced_frames(m, inbound_.frames());
    auto replies = manager_.submit(std::move(m), std::move(frames), [down = down_, mu = send_mu_](const ProtocolMessage& r) {
      std::lock_guard lock(*mu);
      try {
        down->send(r);
      } catch (const Error& e) {
        spdlog::warn("relay downlink: {}", e.what());
      }
    });
    if (creates) pending_query_ = std::move(replies);
  }
  return ready.size();
}

void RelayBridge::start(std::chrono::milliseconds period) {
  poller_ = std::jthread([this, period](std::stop_token st) {
    while (!st.stop_requested()) {
      try {
        pump();
      } catch (const Error& e) {
        spdlog::debug("relay poll: {}", e.what());
      }
      std::this_thread::sleep_for(period);
    }
  });
}

void RelayBridge::stop() {
  if (poller_.joinable()) {
    poller_.request_stop();
    poller_.join();
  }
}

}  // namespace guided::session
