#include "guided/session/protocol.hpp"

#include <fmt/format.h>

#include "guided/guidance/compiler.hpp"
#include "guided/plan/plan.hpp"

namespace guided::session {

using nlohmann::json;

namespace {

constexpr std::pair<MessageKind, std::string_view> kKinds[] = {
    {MessageKind::kQuery, "query"},
    {MessageKind::kSnapshot, "snapshot"},
    {MessageKind::kAdvance, "advance"},
    {MessageKind::kBack, "back"},
    {MessageKind::kGetState, "get_state"},
    {MessageKind::kPlanReady, "plan_ready"},
    {MessageKind::kGuidanceReady, "guidance_ready"},
    {MessageKind::kTimerTick, "timer_tick"},
    {MessageKind::kError, "error"},
};

[[noreturn]] void protocol_error(const std::string& what) { throw Error(ErrorCode::kProtocolError, what); }

}  // namespace

std::string_view kind_name(MessageKind k) {
  for (const auto& [kind, name] : kKinds) {
    if (kind == k) return name;
  }
  return "?";
}

std::optional<MessageKind> parse_message_kind(std::string_view s) {
  for (const auto& [kind, name] : kKinds) {
    if (name == s) return kind;
  }
  return std::nullopt;
}

bool is_client_kind(MessageKind k) {
  return k == MessageKind::kQuery || k == MessageKind::kSnapshot || k == MessageKind::kAdvance ||
         k == MessageKind::kBack || k == MessageKind::kGetState;
}

json message_to_json(const ProtocolMessage& m) {
  json j{{"v", kProtocolVersion}, {"kind", kind_name(m.kind)}, {"payload", m.payload}};
  if (m.kind != MessageKind::kQuery || !m.session_id.empty()) j["session_id"] = m.session_id;
  return j;
}

ProtocolMessage message_from_json(const json& j) {
  if (!j.is_object()) protocol_error("control message must be a JSON object");
  if (!j.contains("v") || j.at("v") != kProtocolVersion) {
    protocol_error(fmt::format("unsupported protocol version {}", j.contains("v") ? j.at("v").dump() : "(none)"));
  }
  if (!j.contains("kind") || !j.at("kind").is_string()) protocol_error("control message has no kind");
  const auto kind = parse_message_kind(j.at("kind").get<std::string>());
  if (!kind) protocol_error("unknown message kind " + j.at("kind").dump());
  ProtocolMessage m;
  m.kind = *kind;
  if (j.contains("session_id")) {
    if (!j.at("session_id").is_string()) protocol_error("session_id must be a string");
    m.session_id = j.at("session_id").get<std::string>();
  }
  if (m.session_id.empty() && m.kind != MessageKind::kQuery && m.kind != MessageKind::kError) {
    protocol_error(fmt::format("{} needs a session_id", kind_name(m.kind)));
  }
  if (j.contains("payload")) {
    if (!j.at("payload").is_object()) protocol_error("payload must be an object");
    m.payload = j.at("payload");
  }
  return m;
}

std::string encode_control(const ProtocolMessage& m) { return message_to_json(m).dump(); }

ProtocolMessage decode_control(std::string_view text) {
  const json j = json::parse(text, nullptr, false);
  if (j.is_discarded()) protocol_error("control message is not JSON");
  return message_from_json(j);
}

ProtocolMessage error_message(std::string session_id, const Error& e) {
  json payload{{"code", error_code_name(e.code())}, {"message", e.what()}};
  if (const auto* step = dynamic_cast<const guidance::StepCompileError*>(&e)) {
    payload["step"] = step->step_index();
    payload["stage"] = step->stage();
  }
  if (const auto* plan = dynamic_cast<const plan::PlanValidationError*>(&e)) {
    json violations = json::array();
    for (const auto& v : plan->violations()) violations.push_back(v.to_string());
    payload["violations"] = violations;
  }
  return {MessageKind::kError, std::move(session_id), std::move(payload)};
}

std::vector<std::uint8_t> encode_frame(const BinaryFrame& f) {
  if (f.frame_id.size() > 0xFFFF) protocol_error("frame id too long");
  std::vector<std::uint8_t> wire;
  wire.reserve(3 + f.frame_id.size() + f.bytes.size());
  wire.push_back(static_cast<std::uint8_t>(f.kind));
  wire.push_back(static_cast<std::uint8_t>(f.frame_id.size() & 0xFF));
  wire.push_back(static_cast<std::uint8_t>(f.frame_id.size() >> 8));
  wire.insert(wire.end(), f.frame_id.begin(), f.frame_id.end());
  wire.insert(wire.end(), f.bytes.begin(), f.bytes.end());
  return wire;
}

BinaryFrame decode_frame(std::span<const std::uint8_t> wire) {
  if (wire.size() < 3) protocol_error("binary frame shorter than its header");
  BinaryFrame f;
  if (wire[0] != static_cast<std::uint8_t>(FrameKind::kPng) &&
      wire[0] != static_cast<std::uint8_t>(FrameKind::kDepthF32)) {
    protocol_error(fmt::format("unknown binary frame kind {}", wire[0]));
  }
  f.kind = static_cast<FrameKind>(wire[0]);
  const std::size_t id_len = wire[1] | (static_cast<std::size_t>(wire[2]) << 8);
  if (id_len == 0 || wire.size() < 3 + id_len) protocol_error("binary frame id is truncated or empty");
  f.frame_id.assign(wire.begin() + 3, wire.begin() + 3 + static_cast<std::ptrdiff_t>(id_len));
  f.bytes.assign(wire.begin() + 3 + static_cast<std::ptrdiff_t>(id_len), wire.end());
  return f;
}

void FrameStore::put(BinaryFrame frame) {
  const std::string id = frame.frame_id;
  if (frames_.insert_or_assign(id, std::move(frame)).second) order_.push_back(id);
  while (frames_.size() > capacity_) {
    frames_.erase(order_.front());
    order_.pop_front();
  }
}

const BinaryFrame& FrameStore::get(std::string_view frame_id, FrameKind kind) const {
  const auto it = frames_.find(frame_id);
  if (it == frames_.end()) protocol_error(fmt::format("frame '{}' was never uploaded", frame_id));
  if (it->second.kind != kind) protocol_error(fmt::format("frame '{}' has the wrong kind", frame_id));
  return it->second;
}

geometry::SnapshotPtr snapshot_from_ref(const json& ref, const FrameStore& frames) {
  try {
    auto s = std::make_shared<geometry::SceneSnapshot>();
    const std::string image_id = ref.at("image").get<std::string>();
    s->id = ref.value("id", image_id);
    s->image = decode_png(frames.get(image_id, FrameKind::kPng).bytes);
    s->depth = geometry::DepthMap::from_bytes(ref.at("depth_width").get<int>(), ref.at("depth_height").get<int>(),
                                              frames.get(ref.at("depth").get<std::string>(), FrameKind::kDepthF32).bytes);
    s->intrinsics = geometry::intrinsics_from_json(ref.at("intrinsics"));
    s->pose = geometry::pose_from_json(ref.at("pose"));
    s->validate();
    return s;
  } catch (const json::exception& e) {
    protocol_error(fmt::format("snapshot reference: {}", e.what()));
  }
}

std::pair<json, std::vector<BinaryFrame>> snapshot_to_ref(const geometry::SceneSnapshot& scene,
                                                          const std::string& prefix) {
  BinaryFrame image{prefix + "/image", FrameKind::kPng, encode_png(scene.image)};
  BinaryFrame depth{prefix + "/depth", FrameKind::kDepthF32, scene.depth.to_bytes()};
  json ref{{"id", scene.id},
           {"image", image.frame_id},
           {"depth", depth.frame_id},
           {"depth_width", scene.depth.width()},
           {"depth_height", scene.depth.height()},
           {"intrinsics", geometry::intrinsics_to_json(scene.intrinsics)},
           {"pose", geometry::pose_to_json(scene.pose)}};
  std::vector<BinaryFrame> out;
  out.push_back(std::move(image));
  out.push_back(std::move(depth));
  return {std::move(ref), std::move(out)};
}

}  // namespace guided::session
