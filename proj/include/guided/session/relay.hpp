#pragma once

#include <chrono>
#include <cstdint>
#include <functional>
#include <map>
#include <mutex>
#include <random>
#include <string>
#include <variant>
#include <vector>

#include "guided/session/protocol.hpp"

namespace guided::session {

using Clock = std::chrono::steady_clock;

// One unit on the store-and-forward path. seq is per sender stream and
// starts at 1.
struct Envelope {
  std::uint64_t seq = 0;
  std::variant<ProtocolMessage, BinaryFrame> body;

  friend bool operator==(const Envelope&, const Envelope&) = default;
};

nlohmann::json envelope_to_json(const Envelope& e);  // frames travel base64
Envelope envelope_from_json(const nlohmann::json& j);

// Restores the sender's order on an at-least-once channel. Envelopes below
// the next expected seq are duplicates; envelopes ahead of it are held until
// the gap fills or the oldest held one outlives the TTL, at which point the
// gap is skipped. At most `window` seqs ahead of the expected one are held.
class Sequencer {
 public:
  explicit Sequencer(std::size_t window = 256, Clock::duration ttl = std::chrono::seconds(10));

  // Envelopes now deliverable, in order. Throws Error(kProtocolError) for
  // seq 0 or a seq beyond the window.
  std::vector<Envelope> accept(Envelope e, Clock::time_point now = Clock::now());
  // Releases held envelopes whose gap has outlived the TTL.
  std::vector<Envelope> expire(Clock::time_point now = Clock::now());

  std::uint64_t next_expected() const { return next_; }
  std::size_t held() const { return held_.size(); }
  std::size_t duplicates() const { return duplicates_; }
  std::size_t skipped() const { return skipped_; }

 private:
  std::vector<Envelope> drain();

  std::size_t window_;
  Clock::duration ttl_;
  std::uint64_t next_ = 1;
  std::map<std::uint64_t, std::pair<Envelope, Clock::time_point>> held_;
  std::size_t duplicates_ = 0;
  std::size_t skipped_ = 0;
};

// One client's inbound relay stream: restores order, absorbs binary frames
// into its store and yields control messages in sender order.
class InboundStream {
 public:
  explicit InboundStream(std::size_t window = 256, Clock::duration ttl = std::chrono::seconds(10),
                         std::size_t frame_capacity = 64)
      : sequencer_(window, ttl), frames_(frame_capacity) {}
  std::vector<ProtocolMessage> accept(Envelope e, Clock::time_point now = Clock::now());
  std::vector<ProtocolMessage> expire(Clock::time_point now = Clock::now());
  const FrameStore& frames() const { return frames_; }
  const Sequencer& sequencer() const { return sequencer_; }

 private:
  std::vector<ProtocolMessage> absorb(std::vector<Envelope> ready);
  Sequencer sequencer_;
  FrameStore frames_;
};

// Polled mailbox channel with at-least-once delivery. Both operations throw
// Error(kRelayUnavailable) while the relay is down.
class Relay {
 public:
  virtual ~Relay() = default;
  virtual void post(const std::string& mailbox, const Envelope& e) = 0;
  virtual std::vector<Envelope> poll(const std::string& mailbox, std::size_t max = 64) = 0;
};

// Process-local relay. Can be taken down, and can redeliver: each posted
// envelope is queued 1 + Bernoulli(duplicate_rate) times, and polls may
// shuffle within a batch.
class InMemoryRelay : public Relay {
 public:
  explicit InMemoryRelay(double duplicate_rate = 0.0, bool shuffle = false, std::uint32_t seed = 7);
  void post(const std::string& mailbox, const Envelope& e) override;
  std::vector<Envelope> poll(const std::string& mailbox, std::size_t max = 64) override;
  void set_available(bool up);
  std::size_t pending(const std::string& mailbox) const;

 private:
  mutable std::mutex mu_;
  bool up_ = true;
  double duplicate_rate_;
  bool shuffle_;
  std::mt19937 rng_;
  std::map<std::string, std::vector<std::string>> boxes_;  // serialized envelopes
};

// The client's view of an outbound channel.
class Link {
 public:
  virtual ~Link() = default;
  virtual bool connected() const = 0;
  virtual void send(const Envelope& e) = 0;  // throws on failure
};

// Sends over the direct link while it is up and falls back to the relay
// mailbox otherwise. Numbers envelopes. Throws Error(kRelayUnavailable) when
// both paths fail.
class FallbackSender {
 public:
  FallbackSender(Link* direct, Relay* relay, std::string mailbox);
  std::uint64_t send(std::variant<ProtocolMessage, BinaryFrame> body);
  bool last_used_relay() const { return last_used_relay_; }

 private:
  Link* direct_;
  Relay* relay_;
  std::string mailbox_;
  std::uint64_t next_seq_ = 1;
  bool last_used_relay_ = false;
};

// Mailbox names for one client.
std::string uplink_mailbox(const std::string& client_id);    // client -> server
std::string downlink_mailbox(const std::string& client_id);  // server -> client

}  // namespace guided::session
