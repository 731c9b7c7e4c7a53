#include "guided/session/session.hpp"

#include <algorithm>
#include <fstream>
#include <mutex>
#include <random>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "guided/guidance/export.hpp"
#include "guided/text.hpp"

namespace guided::session {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::string random_session_id() {
  static std::mutex mu;
  static std::mt19937_64 rng{std::random_device{}()};
  std::lock_guard lock(mu);
  return fmt::format("{:016x}", rng());
}

json timing_json(const guidance::StepTiming& t) {
  return {{"vision_s", t.vision_s}, {"geometry_s", t.geometry_s}, {"overlap_s", t.overlap_s}, {"total_s", t.total_s}};
}

guidance::StepTiming timing_from(const json& j) {
  return {j.at("vision_s").get<double>(), j.at("geometry_s").get<double>(), j.at("overlap_s").get<double>(),
          j.at("total_s").get<double>()};
}

}  // namespace

GuidancePipeline::GuidancePipeline(std::shared_ptr<guidance::GuidanceCompiler> compiler)
    : compiler_(std::move(compiler)) {}

plan::TaskPlan GuidancePipeline::plan(const std::string& query, const geometry::SnapshotPtr& initial,
                                      std::stop_token stop) {
  vision::CallContext ctx;
  ctx.tag = "plan";
  ctx.stop = stop;
  return compiler_->gateway().request_task_plan(query, {initial->id, &initial->image}, ctx).plan;
}

guidance::CompiledStep GuidancePipeline::compile(const plan::PlanStep& step, const guidance::CompileInput& input) {
  return compiler_->compile_step(step, input);
}

json SessionState::fingerprint() const {
  json snaps = json::object();
  for (const auto& [i, s] : snapshots) snaps[std::to_string(i)] = s->id;
  json graphs = json::object();
  for (const auto& [i, g] : exported) graphs[std::to_string(i)] = g;
  json j{{"session_id", session_id},
         {"query", query},
         {"plan", plan::plan_to_json(plan)},
         {"current_step", current_step},
         {"snapshots", snaps},
         {"compiled", graphs},
         {"timer", nullptr}};
  if (timer) j["timer"] = {{"step", timer->step}, {"remaining", timer->remaining}};
  return j;
}

ProtocolMessage timer_tick_message(const std::string& session_id, const TimerState& state) {
  return {MessageKind::kTimerTick,
          session_id,
          {{"step", state.step}, {"remaining", state.remaining}, {"expired", state.remaining == 0}}};
}

Journal::Journal(fs::path dir) : dir_(std::move(dir)) { fs::create_directories(dir_); }

void Journal::append(const std::string& session_id, const json& event) {
  const fs::path path = dir_ / session_id / "journal.jsonl";
  fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::app);
  out << event.dump() << '\n';
  if (!out) throw Error(ErrorCode::kIoError, "cannot append to " + path.string());
}

void Journal::created(const SessionState& s) {
  geometry::save_scene(*s.initial, dir_ / s.session_id / "scenes" / "initial");
  append(s.session_id, {{"event", "created"},
                        {"query", s.query},
                        {"plan", plan::plan_to_json(s.plan)},
                        {"initial", "scenes/initial"},
                        {"initial_id", s.initial->id}});
}

void Journal::compiled(const SessionState& s, std::size_t step) {
  const fs::path scenes = dir_ / s.session_id / "scenes";
  std::size_t n = 0;
  while (fs::exists(scenes / fmt::format("step-{}-{}", step, n))) ++n;
  const std::string rel = fmt::format("scenes/step-{}-{}", step, n);
  geometry::save_scene(*s.snapshots.at(step), dir_ / s.session_id / rel);
  append(s.session_id, {{"event", "compiled"},
                        {"step", step},
                        {"scene", rel},
                        {"scene_id", s.snapshots.at(step)->id},
                        {"scene_graph", s.exported.at(step)},
                        {"timing", timing_json(s.compiled.at(step).timing)}});
}

void Journal::moved(const SessionState& s) {
  append(s.session_id, {{"event", "moved"}, {"current_step", s.current_step}});
}

std::vector<SessionState> Journal::recover() const {
  std::vector<SessionState> out;
  if (!fs::exists(dir_)) return out;
  std::vector<fs::path> dirs;
  for (const auto& entry : fs::directory_iterator(dir_)) {
    if (fs::exists(entry.path() / "journal.jsonl")) dirs.push_back(entry.path());
  }
  std::sort(dirs.begin(), dirs.end());
  for (const auto& sdir : dirs) {
    SessionState s;
    s.session_id = sdir.filename().string();
    std::ifstream in(sdir / "journal.jsonl");
    std::string line;
    bool created = false;
    while (std::getline(in, line)) {
      const json ev = json::parse(line, nullptr, false);
      if (ev.is_discarded()) {
        spdlog::warn("{}: ignoring torn journal line", s.session_id);
        break;
      }
      const std::string kind = ev.at("event");
      if (kind == "created") {
        s.query = ev.at("query");
        s.plan = plan::parse_plan_json(ev.at("plan"), s.query);
        s.initial = std::make_shared<geometry::SceneSnapshot>(
            geometry::load_scene(sdir / ev.at("initial").get<std::string>(), ev.at("initial_id")));
        created = true;
      } else if (kind == "compiled") {
        const std::size_t step = ev.at("step");
        s.snapshots[step] = std::make_shared<geometry::SceneSnapshot>(
            geometry::load_scene(sdir / ev.at("scene").get<std::string>(), ev.at("scene_id")));
        auto compiled = guidance::import_scene_graph(ev.at("scene_graph"));
        compiled.timing = timing_from(ev.at("timing"));
        s.compiled[step] = std::move(compiled);
        s.exported[step] = ev.at("scene_graph");
      } else if (kind == "moved") {
        s.current_step = ev.at("current_step");
      }
    }
    if (created) out.push_back(std::move(s));
  }
  return out;
}

SessionEngine::SessionEngine(std::shared_ptr<Pipeline> pipeline, EngineOptions options)
    : pipeline_(std::move(pipeline)), options_(std::move(options)) {
  if (!options_.next_session_id) options_.next_session_id = random_session_id;
}

const SessionState* SessionEngine::find(const std::string& session_id) const {
  const auto it = sessions_.find(session_id);
  return it == sessions_.end() ? nullptr : &it->second;
}

SessionState& SessionEngine::get(const std::string& session_id) {
  const auto it = sessions_.find(session_id);
  if (it == sessions_.end()) throw Error(ErrorCode::kUnknownSession, "no session " + session_id);
  return it->second;
}

std::vector<std::string> SessionEngine::session_ids() const {
  std::vector<std::string> ids;
  for (const auto& [id, s] : sessions_) ids.push_back(id);
  return ids;
}

void SessionEngine::restore(SessionState state) {
  const std::string id = state.session_id;
  sessions_.insert_or_assign(id, std::move(state));
}

json SessionEngine::fingerprint() const {
  json j = json::object();
  for (const auto& [id, s] : sessions_) j[id] = s.fingerprint();
  return j;
}

std::vector<ProtocolMessage> SessionEngine::handle(const ProtocolMessage& m, const FrameStore& frames,
                                                   std::stop_token stop) {
  try {
    switch (m.kind) {
      case MessageKind::kQuery: return create(m, frames, stop);
      case MessageKind::kSnapshot: {
        SessionState& s = get(m.session_id);
        s.pending_snapshot = snapshot_from_ref(m.payload.at("snapshot"), frames);
        return {};
      }
      case MessageKind::kAdvance: return advance(get(m.session_id), m, frames, stop);
      case MessageKind::kBack: return back(get(m.session_id));
      case MessageKind::kGetState: {
        const SessionState& s = get(m.session_id);
        json payload{{"plan", plan::plan_to_json(s.plan)},
                     {"step_count", s.plan.steps.size()},
                     {"current_step", s.current_step},
                     {"timer", s.timer ? json{{"step", s.timer->step}, {"remaining", s.timer->remaining}} : json()}};
        return {{MessageKind::kPlanReady, s.session_id, std::move(payload)}};
      }
      default:
        throw Error(ErrorCode::kProtocolError, fmt::format("{} is a server message", kind_name(m.kind)));
    }
  } catch (const Error& e) {
    return {error_message(m.session_id, e)};
  } catch (const nlohmann::json::exception& e) {
    return {error_message(m.session_id, Error(ErrorCode::kProtocolError, e.what()))};
  }
}

std::vector<ProtocolMessage> SessionEngine::create(const ProtocolMessage& m, const FrameStore& frames,
                                                   std::stop_token stop) {
  const std::string query = text::trim(m.payload.value("query", std::string()));
  if (query.empty()) throw Error(ErrorCode::kEmptyQuery, "query is empty");
  const auto initial = snapshot_from_ref(m.payload.at("snapshot"), frames);
  plan::TaskPlan plan = pipeline_->plan(query, initial, stop);
  if (plan.steps.empty()) throw Error(ErrorCode::kSchemaViolation, "plan has no steps");

  SessionState s;
  s.session_id = options_.next_session_id();
  s.query = query;
  s.plan = std::move(plan);
  s.initial = initial;
  auto [it, fresh] = sessions_.emplace(s.session_id, std::move(s));
  if (!fresh) throw Error(ErrorCode::kProtocolError, "session id collision");
  SessionState& state = it->second;
  if (options_.journal) options_.journal->created(state);
  spdlog::info("session {} created with {} steps", state.session_id, state.plan.steps.size());

  json plan_payload{{"plan", plan::plan_to_json(state.plan)}, {"step_count", state.plan.steps.size()}};
  if (state.plan.device_hint) plan_payload["device_hint"] = *state.plan.device_hint;
  std::vector<ProtocolMessage> out{{MessageKind::kPlanReady, state.session_id, std::move(plan_payload)}};
  if (compile_into(state, 0, initial, stop, out)) {
    land_on(state, 0);
    out.push_back(serve(state, 0, false));
  }
  return out;
}

std::vector<ProtocolMessage> SessionEngine::advance(SessionState& s, const ProtocolMessage& m,
                                                    const FrameStore& frames, std::stop_token stop) {
  const std::size_t next = s.current_step + 1;
  if (next >= s.plan.steps.size()) {
    throw Error(ErrorCode::kEndOfPlan, fmt::format("step {} is the last of {}", s.current_step, s.plan.steps.size()));
  }
  geometry::SnapshotPtr snapshot;
  if (m.payload.contains("snapshot")) {
    snapshot = snapshot_from_ref(m.payload.at("snapshot"), frames);
  } else if (s.pending_snapshot) {
    snapshot = std::exchange(s.pending_snapshot, nullptr);
  }
  std::vector<ProtocolMessage> out;
  if (!snapshot && s.compiled.contains(next)) {
    land_on(s, next);
    out.push_back(serve(s, next, true));
    return out;
  }
  if (!snapshot) snapshot = s.snapshots.contains(s.current_step) ? s.snapshots.at(s.current_step) : s.initial;
  if (compile_into(s, next, snapshot, stop, out)) {
    land_on(s, next);
    out.push_back(serve(s, next, false));
  }
  return out;
}

std::vector<ProtocolMessage> SessionEngine::back(SessionState& s) {
  if (s.current_step == 0) throw Error(ErrorCode::kAtFirstStep, "already at the first step");
  const std::size_t prev = s.current_step - 1;
  std::vector<ProtocolMessage> out;
  if (!s.compiled.contains(prev)) {
    const auto snapshot = s.snapshots.contains(prev) ? s.snapshots.at(prev) : s.initial;
    if (!compile_into(s, prev, snapshot, {}, out)) return out;
    land_on(s, prev);
    out.push_back(serve(s, prev, false));
    return out;
  }
  land_on(s, prev);
  out.push_back(serve(s, prev, true));
  return out;
}

bool SessionEngine::compile_into(SessionState& s, std::size_t step, const geometry::SnapshotPtr& snapshot,
                                 std::stop_token stop, std::vector<ProtocolMessage>& out) {
  guidance::CompileInput in;
  in.step_index = step;
  in.snapshot = snapshot;
  in.initial = s.initial;
  in.tag = s.session_id;
  in.stop = stop;
  try {
    auto compiled = pipeline_->compile(s.plan.steps.at(step), in);
    s.exported[step] = guidance::export_scene_graph(compiled, snapshot->intrinsics, {false, true});
    s.snapshots[step] = snapshot;
    s.compiled[step] = std::move(compiled);
  } catch (const Error& e) {
    spdlog::warn("session {} step {}: {}", s.session_id, step, e.what());
    out.push_back(error_message(s.session_id, e));
    return false;
  }
  if (options_.journal) options_.journal->compiled(s, step);
  return true;
}

void SessionEngine::land_on(SessionState& s, std::size_t step) {
  s.current_step = step;
  s.timer.reset();
  if (const auto seconds = s.plan.steps.at(step).wait_seconds()) {
    s.timer = TimerState{step, *seconds, ++timer_generation_};
  }
  if (options_.journal) options_.journal->moved(s);
}

ProtocolMessage SessionEngine::serve(SessionState& s, std::size_t step, bool cached) {
  const auto& c = s.compiled.at(step);
  json payload{{"step", step},
               {"step_count", s.plan.steps.size()},
               {"cached", cached},
               {"visual_type", plan::visual_type_code(c.visual_type)},
               {"scene_graph", s.exported.at(step)},
               {"timing", timing_json(c.timing)}};
  return {MessageKind::kGuidanceReady, s.session_id, std::move(payload)};
}

std::optional<ProtocolMessage> SessionEngine::tick(const std::string& session_id, std::uint64_t generation) {
  const auto it = sessions_.find(session_id);
  if (it == sessions_.end() || !it->second.timer || it->second.timer->generation != generation) return std::nullopt;
  auto& timer = *it->second.timer;
  ProtocolMessage msg = timer_tick_message(session_id, timer);
  if (timer.remaining == 0) {
    it->second.timer.reset();
  } else {
    --timer.remaining;
  }
  return msg;
}

}  // namespace guided::session
