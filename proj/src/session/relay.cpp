#include "guided/session/relay.hpp"

#include <algorithm>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "guided/codec.hpp"

namespace guided::session {

using nlohmann::json;

json envelope_to_json(const Envelope& e) {
  json j{{"seq", e.seq}};
  if (const auto* m = std::get_if<ProtocolMessage>(&e.body)) {
    j["control"] = message_to_json(*m);
  } else {
    j["frame"] = codec::base64_encode(encode_frame(std::get<BinaryFrame>(e.body)));
  }
  return j;
}

Envelope envelope_from_json(const json& j) {
  try {
    Envelope e;
    e.seq = j.at("seq").get<std::uint64_t>();
    if (j.contains("control")) {
      e.body = message_from_json(j.at("control"));
    } else {
      e.body = decode_frame(codec::base64_decode(j.at("frame").get<std::string>()));
    }
    return e;
  } catch (const json::exception& ex) {
    throw Error(ErrorCode::kProtocolError, fmt::format("relay envelope: {}", ex.what()));
  }
}

Sequencer::Sequencer(std::size_t window, Clock::duration ttl) : window_(window), ttl_(ttl) {}

std::vector<Envelope> Sequencer::drain() {
  std::vector<Envelope> out;
  for (auto it = held_.find(next_); it != held_.end(); it = held_.find(next_)) {
    out.push_back(std::move(it->second.first));
    held_.erase(it);
    ++next_;
  }
  return out;
}

std::vector<Envelope> Sequencer::accept(Envelope e, Clock::time_point now) {
  if (e.seq == 0) throw Error(ErrorCode::kProtocolError, "sequence numbers start at 1");
  if (e.seq < next_ || held_.contains(e.seq)) {
    ++duplicates_;
    return {};
  }
  if (e.seq >= next_ + window_) {
    throw Error(ErrorCode::kProtocolError,
                fmt::format("seq {} is beyond the window (expecting {})", e.seq, next_));
  }
  const std::uint64_t seq = e.seq;
  held_.emplace(seq, std::make_pair(std::move(e), now));
  return drain();
}

std::vector<Envelope> Sequencer::expire(Clock::time_point now) {
  std::vector<Envelope> out;
  while (!held_.empty()) {
    const auto oldest = std::min_element(held_.begin(), held_.end(), [](const auto& a, const auto& b) {
      return a.second.second < b.second.second;
    });
    if (now - oldest->second.second < ttl_) break;
    const std::uint64_t first = held_.begin()->first;
    spdlog::warn("relay gap {}..{} expired; skipping", next_, first - 1);
    skipped_ += first - next_;
    next_ = first;
    for (auto& e : drain()) out.push_back(std::move(e));
  }
  return out;
}

std::vector<ProtocolMessage> InboundStream::absorb(std::vector<Envelope> ready) {
  std::vector<ProtocolMessage> out;
  for (auto& e : ready) {
    if (auto* frame = std::get_if<BinaryFrame>(&e.body)) {
      frames_.put(std::move(*frame));
    } else {
      out.push_back(std::move(std::get<ProtocolMessage>(e.body)));
    }
  }
  return out;
}

std::vector<ProtocolMessage> InboundStream::accept(Envelope e, Clock::time_point now) {
  return absorb(sequencer_.accept(std::move(e), now));
}

std::vector<ProtocolMessage> InboundStream::expire(Clock::time_point now) { return absorb(sequencer_.expire(now)); }

InMemoryRelay::InMemoryRelay(double duplicate_rate, bool shuffle, std::uint32_t seed)
    : duplicate_rate_(duplicate_rate), shuffle_(shuffle), rng_(seed) {}

void InMemoryRelay::post(const std::string& mailbox, const Envelope& e) {
  std::lock_guard lock(mu_);
  if (!up_) throw Error(ErrorCode::kRelayUnavailable, "relay is unavailable");
  auto& box = boxes_[mailbox];
  const std::string text = envelope_to_json(e).dump();
  box.push_back(text);
  if (duplicate_rate_ > 0 && std::bernoulli_distribution(duplicate_rate_)(rng_)) box.push_back(text);
}

std::vector<Envelope> InMemoryRelay::poll(const std::string& mailbox, std::size_t max) {
  std::vector<std::string> batch;
  {
    std::lock_guard lock(mu_);
    if (!up_) throw Error(ErrorCode::kRelayUnavailable, "relay is unavailable");
    auto& box = boxes_[mailbox];
    const auto n = std::min(max, box.size());
    batch.assign(box.begin(), box.begin() + static_cast<std::ptrdiff_t>(n));
    box.erase(box.begin(), box.begin() + static_cast<std::ptrdiff_t>(n));
    if (shuffle_) std::shuffle(batch.begin(), batch.end(), rng_);
  }
  std::vector<Envelope> out;
  for (const auto& text : batch) out.push_back(envelope_from_json(json::parse(text)));
  return out;
}

void InMemoryRelay::set_available(bool up) {
  std::lock_guard lock(mu_);
  up_ = up;
}

std::size_t InMemoryRelay::pending(const std::string& mailbox) const {
  std::lock_guard lock(mu_);
  const auto it = boxes_.find(mailbox);
  return it == boxes_.end() ? 0 : it->second.size();
}

FallbackSender::FallbackSender(Link* direct, Relay* relay, std::string mailbox)
    : direct_(direct), relay_(relay), mailbox_(std::move(mailbox)) {}

std::uint64_t FallbackSender::send(std::variant<ProtocolMessage, BinaryFrame> body) {
  const Envelope e{next_seq_, std::move(body)};
  if (direct_ != nullptr && direct_->connected()) {
    try {
      direct_->send(e);
      last_used_relay_ = false;
      return next_seq_++;
    } catch (const std::exception& ex) {
      spdlog::info("direct link failed ({}); falling back to relay", ex.what());
    }
  }
  if (relay_ == nullptr) throw Error(ErrorCode::kRelayUnavailable, "socket is down and no relay is configured");
  try {
    relay_->post(mailbox_, e);
  } catch (const Error& ex) {
    throw Error(ErrorCode::kRelayUnavailable, fmt::format("socket and relay are both down: {}", ex.what()));
  }
  last_used_relay_ = true;
  return next_seq_++;
}

std::string uplink_mailbox(const std::string& client_id) { return client_id + "/up"; }
std::string downlink_mailbox(const std::string& client_id) { return client_id + "/down"; }

}  // namespace guided::session
