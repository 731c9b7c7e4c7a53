#pragma once

#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <stop_token>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "guided/guidance/compiler.hpp"
#include "guided/plan/plan.hpp"
#include "guided/session/protocol.hpp"

namespace guided::session {

// Plan generation and step compilation as the session sees them.
class Pipeline {
 public:
  virtual ~Pipeline() = default;
  virtual plan::TaskPlan plan(const std::string& query, const geometry::SnapshotPtr& initial,
                              std::stop_token stop) = 0;
  virtual guidance::CompiledStep compile(const plan::PlanStep& step, const guidance::CompileInput& input) = 0;
};

// Gateway + compiler.
class GuidancePipeline : public Pipeline {
 public:
  explicit GuidancePipeline(std::shared_ptr<guidance::GuidanceCompiler> compiler);
  plan::TaskPlan plan(const std::string& query, const geometry::SnapshotPtr& initial, std::stop_token stop) override;
  guidance::CompiledStep compile(const plan::PlanStep& step, const guidance::CompileInput& input) override;

 private:
  std::shared_ptr<guidance::GuidanceCompiler> compiler_;
};

struct TimerState {
  std::size_t step = 0;
  int remaining = 0;
  std::uint64_t generation = 0;  // bumps on every (re)start; stale ticks are dropped

  friend bool operator==(const TimerState&, const TimerState&) = default;
};

struct SessionState {
  std::string session_id;
  std::string query;
  plan::TaskPlan plan;
  std::size_t current_step = 0;
  geometry::SnapshotPtr initial;  // axis-defining frame
  std::map<std::size_t, geometry::SnapshotPtr> snapshots;
  std::map<std::size_t, guidance::CompiledStep> compiled;
  std::map<std::size_t, nlohmann::json> exported;  // scene graphs as first emitted
  std::optional<TimerState> timer;
  geometry::SnapshotPtr pending_snapshot;  // uploaded by a snapshot message, used by the next advance

  // Navigation-relevant state without timings; equal across runs that saw
  // the same message stream.
  nlohmann::json fingerprint() const;
};

// Append-only per-session journal: <dir>/<session_id>/journal.jsonl plus the
// scenes it references. Enough to rebuild a SessionState without
// recompiling.
class Journal {
 public:
  explicit Journal(std::filesystem::path dir);
  void created(const SessionState& s);
  void compiled(const SessionState& s, std::size_t step);
  void moved(const SessionState& s);
  // Every session found under the directory.
  std::vector<SessionState> recover() const;
  const std::filesystem::path& directory() const { return dir_; }

 private:
  void append(const std::string& session_id, const nlohmann::json& event);
  std::filesystem::path dir_;
};

struct EngineOptions {
  std::function<std::string()> next_session_id;  // default: random hex
  std::shared_ptr<Journal> journal;
};

// All session logic, single-threaded. Callers serialize access per session
// (SessionManager does so with one strand per session).
class SessionEngine {
 public:
  explicit SessionEngine(std::shared_ptr<Pipeline> pipeline, EngineOptions options = {});

  // Replies to one client message; errors become error messages. `frames`
  // resolves snapshot references.
  std::vector<ProtocolMessage> handle(const ProtocolMessage& m, const FrameStore& frames, std::stop_token stop = {});

  // The next countdown tick, or nullopt when the timer is gone or stale.
  std::optional<ProtocolMessage> tick(const std::string& session_id, std::uint64_t generation);

  const SessionState* find(const std::string& session_id) const;
  std::vector<std::string> session_ids() const;
  void restore(SessionState state);
  nlohmann::json fingerprint() const;

 private:
  std::vector<ProtocolMessage> create(const ProtocolMessage& m, const FrameStore& frames, std::stop_token stop);
  std::vector<ProtocolMessage> advance(SessionState& s, const ProtocolMessage& m, const FrameStore& frames,
                                       std::stop_token stop);
  std::vector<ProtocolMessage> back(SessionState& s);
  ProtocolMessage serve(SessionState& s, std::size_t step, bool cached);
  bool compile_into(SessionState& s, std::size_t step, const geometry::SnapshotPtr& snapshot, std::stop_token stop,
                    std::vector<ProtocolMessage>& out);
  void land_on(SessionState& s, std::size_t step);
  SessionState& get(const std::string& session_id);

  std::shared_ptr<Pipeline> pipeline_;
  EngineOptions options_;
  std::map<std::string, SessionState> sessions_;
  std::uint64_t timer_generation_ = 0;
};

// Countdown message for `state`: {"step", "remaining", "expired"}.
ProtocolMessage timer_tick_message(const std::string& session_id, const TimerState& state);

}  // namespace guided::session
