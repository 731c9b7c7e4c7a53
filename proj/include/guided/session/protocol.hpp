#pragma once

#include <cstdint>
#include <deque>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "guided/error.hpp"
#include "guided/geometry/scene.hpp"

namespace guided::session {

inline constexpr std::string_view kProtocolVersion = "gr/1";

enum class MessageKind {
  kQuery,
  kSnapshot,
  kAdvance,
  kBack,
  kGetState,
  kPlanReady,
  kGuidanceReady,
  kTimerTick,
  kError,
};

std::string_view kind_name(MessageKind k);  // "query", "guidance_ready", ...
std::optional<MessageKind> parse_message_kind(std::string_view s);
bool is_client_kind(MessageKind k);

// Control document: {"v": "gr/1", "kind", "session_id", "payload"}.
// session_id is required on everything except query.
struct ProtocolMessage {
  MessageKind kind = MessageKind::kGetState;
  std::string session_id;
  nlohmann::json payload = nlohmann::json::object();

  friend bool operator==(const ProtocolMessage&, const ProtocolMessage&) = default;
};

nlohmann::json message_to_json(const ProtocolMessage& m);
// Throws Error(kProtocolError) for a wrong version, unknown kind or missing
// session_id.
ProtocolMessage message_from_json(const nlohmann::json& j);
std::string encode_control(const ProtocolMessage& m);
ProtocolMessage decode_control(std::string_view text);

ProtocolMessage error_message(std::string session_id, const Error& e);

enum class FrameKind : std::uint8_t { kPng = 1, kDepthF32 = 2 };

// Wire layout: [u8 kind][u16 LE id length][id bytes][payload bytes].
struct BinaryFrame {
  std::string frame_id;
  FrameKind kind = FrameKind::kPng;
  std::vector<std::uint8_t> bytes;

  friend bool operator==(const BinaryFrame&, const BinaryFrame&) = default;
};

std::vector<std::uint8_t> encode_frame(const BinaryFrame& f);
BinaryFrame decode_frame(std::span<const std::uint8_t> wire);  // throws kProtocolError

// Frames uploaded on one client stream, awaiting the control message that
// references them. Holds at most `capacity` frames; the oldest is evicted.
class FrameStore {
 public:
  explicit FrameStore(std::size_t capacity = 64) : capacity_(capacity) {}
  void put(BinaryFrame frame);
  // Throws Error(kProtocolError) when absent or of another kind.
  const BinaryFrame& get(std::string_view frame_id, FrameKind kind) const;
  std::size_t size() const { return frames_.size(); }

 private:
  std::size_t capacity_;
  std::map<std::string, BinaryFrame, std::less<>> frames_;
  std::deque<std::string> order_;
};

// Snapshot reference inside a control payload: the scene metadata document
// with "image" and "depth" naming uploaded frames, plus an optional "id".
//   {"id"?, "image": fid, "depth": fid, "depth_width", "depth_height",
//    "intrinsics": {...}, "pose": {...}}
geometry::SnapshotPtr snapshot_from_ref(const nlohmann::json& ref, const FrameStore& frames);
// Frames and the reference document for `scene`; frame ids are derived from
// `prefix`.
std::pair<nlohmann::json, std::vector<BinaryFrame>> snapshot_to_ref(const geometry::SceneSnapshot& scene,
                                                                   const std::string& prefix);

}  // namespace guided::session
