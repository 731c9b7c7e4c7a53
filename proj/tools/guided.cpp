#include <csignal>
#include <filesystem>
#include <iostream>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "guided/eval/replay.hpp"
#include "guided/eval/report.hpp"
#include "guided/plan/classifier.hpp"
#include "guided/session/server.hpp"
#include "guided/text.hpp"
#include "guided/vision/mock.hpp"

namespace fs = std::filesystem;
using namespace guided;

namespace {

std::atomic<bool> g_stop{false};

void on_signal(int) { g_stop = true; }

// host:port, host alone, or :port.
std::pair<std::string, unsigned short> split_address(const std::string& s) {
  const auto colon = s.rfind(':');
  if (colon == std::string::npos) return {s, 0};
  const std::string host = colon == 0 ? "127.0.0.1" : s.substr(0, colon);
  const int port = std::stoi(s.substr(colon + 1));
  if (port < 0 || port > 65535) throw Error(ErrorCode::kConfigError, "port out of range: " + s);
  return {host, static_cast<unsigned short>(port)};
}

// A bundle directory or a provider directory holding index.json.
fs::path provider_dir_of(const fs::path& p) {
  if (fs::exists(p / "index.json")) return p;
  if (fs::exists(p / "bundle.json")) return eval::FixtureBundle::load(p).provider_dir();
  throw Error(ErrorCode::kConfigError, p.string() + ": neither a bundle nor a provider fixture");
}

// Bundle directories, or roots holding bundle directories.
std::vector<eval::FixtureBundle> load_bundles(const std::vector<fs::path>& paths) {
  std::vector<eval::FixtureBundle> out;
  for (const auto& p : paths) {
    if (fs::exists(p / "bundle.json")) {
      out.push_back(eval::FixtureBundle::load(p));
    } else {
      for (auto& b : eval::FixtureBundle::load_all(p)) out.push_back(std::move(b));
    }
  }
  return out;
}

std::vector<eval::StepOutcome> load_outcome_files(const std::vector<fs::path>& paths) {
  std::vector<eval::StepOutcome> all;
  for (const auto& p : paths) {
    for (auto& o : eval::load_outcomes(p)) all.push_back(std::move(o));
  }
  return all;
}

void emit(const std::string& bytes, const std::optional<fs::path>& out) {
  if (out) {
    text::write_file(out->string(), bytes);
  } else {
    std::cout << bytes;
  }
}

int serve(const std::string& listen, const std::optional<fs::path>& fixture,
          const std::optional<fs::path>& provider_config, const std::optional<fs::path>& journal_dir) {
  vision::ProviderSetup setup;
  if (fixture) {
    setup.backend = vision::MockBackend::load(provider_dir_of(*fixture));
  } else if (provider_config) {
    setup = vision::load_provider_config(*provider_config);
  } else {
    throw Error(ErrorCode::kConfigError, "serve needs --fixture or --provider-config");
  }
  auto gateway = std::make_shared<vision::VisionGateway>(setup.backend, setup.gateway);
  auto compiler = std::make_shared<guidance::GuidanceCompiler>(gateway);
  session::ManagerOptions options;
  if (journal_dir) options.journal = std::make_shared<session::Journal>(*journal_dir);
  session::SessionManager manager(std::make_shared<session::GuidancePipeline>(compiler), options);
  if (journal_dir) spdlog::info("recovered {} sessions", manager.recover());

  const auto [host, port] = split_address(listen);
  session::GuidanceServer server(manager, {host, port});
  server.start();
  spdlog::info("gr/1 listening on {}:{}", host, server.port());
  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);
  while (!g_stop) std::this_thread::sleep_for(std::chrono::milliseconds(100));
  server.stop();
  return 0;
}

int plan_check(const fs::path& path) {
  try {
    const auto plan = plan::parse_plan(text::read_file(path.string()));
    for (std::size_t i = 0; i < plan.steps.size(); ++i) {
      const auto& s = plan.steps[i];
      std::cout << fmt::format("{}  {:<10} {}\n", i, plan::visual_type_name(s.visual_type()), s.instruction());
    }
    std::cout << fmt::format("ok: {} steps\n", plan.steps.size());
    return 0;
  } catch (const plan::PlanValidationError& e) {
    for (const auto& v : e.violations()) std::cout << v.to_string() << '\n';
    return 1;
  }
}

int classify(const std::vector<std::string>& instructions, const std::optional<fs::path>& lexicons) {
  const auto lex = lexicons ? plan::ClassifierLexicons::load(lexicons->string()) : plan::ClassifierLexicons::defaults();
  for (const auto& line : instructions) {
    const auto c = plan::classify_visual_type(line, lex);
    std::cout << fmt::format("{} {:<10} {:<9} {}\n", plan::visual_type_code(c.type), plan::visual_type_name(c.type),
                             c.rule, c.token.value_or("-"));
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Grounded task guidance: session server and evaluation tools"};
  app.require_subcommand(1);
  std::string log_level = "info";
  app.add_option("--log-level", log_level, "trace, debug, info, warn, error or off");

  auto* serve_cmd = app.add_subcommand("serve", "Run the gr/1 session server");
  std::string listen = "127.0.0.1:8765";
  std::optional<fs::path> fixture, provider_config, journal_dir;
  serve_cmd->add_option("--listen", listen, "host:port");
  serve_cmd->add_option("--fixture", fixture, "Route every provider call to this bundle's mock fixture");
  serve_cmd->add_option("--provider-config", provider_config, "Live provider config (JSON)");
  serve_cmd->add_option("--journal", journal_dir, "Session journal directory");

  auto* replay_cmd = app.add_subcommand("replay", "Replay labelled bundles and write step outcomes");
  std::vector<fs::path> bundle_paths;
  std::string mode = "mock";
  std::optional<fs::path> out;
  std::size_t parallel = 4;
  replay_cmd->add_option("bundles", bundle_paths, "Bundle directories or roots")->required();
  replay_cmd->add_option("--mode", mode, "mock or live")->check(CLI::IsMember({"mock", "live"}));
  replay_cmd->add_option("--provider-config", provider_config, "Live provider config (JSON)");
  replay_cmd->add_option("--parallel", parallel, "Bundles replayed at once");
  replay_cmd->add_option("-o,--out", out, "Outcome file (default stdout)");

  auto* aggregate_cmd = app.add_subcommand("aggregate", "Fold outcome files into a metrics report (JSON)");
  std::vector<fs::path> outcome_paths;
  aggregate_cmd->add_option("outcomes", outcome_paths, "Outcome files")->required();
  aggregate_cmd->add_option("-o,--out", out, "Report file (default stdout)");

  auto* report_cmd = app.add_subcommand("report", "Render a metrics report or outcome files");
  std::vector<fs::path> report_inputs;
  std::string format = "text";
  bool no_latency = false;
  report_cmd->add_option("inputs", report_inputs, "Report JSON, or outcome files")->required();
  report_cmd->add_option("--format", format, "text, csv or json")->check(CLI::IsMember({"text", "csv", "json"}));
  report_cmd->add_flag("--no-latency", no_latency, "Counts only");
  report_cmd->add_option("-o,--out", out, "Output file (default stdout)");

  auto* plan_cmd = app.add_subcommand("plan-check", "Validate a plan document");
  fs::path plan_path;
  plan_cmd->add_option("plan", plan_path, "Plan JSON")->required();

  auto* classify_cmd = app.add_subcommand("classify", "Run the reference visual-type classifier");
  std::vector<std::string> instructions;
  std::optional<fs::path> lexicons;
  classify_cmd->add_option("instructions", instructions, "Instructions")->required();
  classify_cmd->add_option("--lexicons", lexicons, "Lexicon file");

  CLI11_PARSE(app, argc, argv);
  spdlog::set_default_logger(spdlog::stderr_color_mt("guided"));
  spdlog::set_level(spdlog::level::from_str(log_level));

  try {
    if (*serve_cmd) return serve(listen, fixture, provider_config, journal_dir);
    if (*replay_cmd) {
      eval::ReplayOptions options;
      options.mode = *eval::parse_replay_mode(mode);
      options.provider_config = provider_config;
      options.parallelism = parallel;
      std::vector<eval::StepOutcome> outcomes;
      for (const auto& r : eval::replay_all(load_bundles(bundle_paths), options)) {
        if (r.plan_error) spdlog::warn("{}: {}", r.bundle_id, *r.plan_error);
        for (auto& o : r.outcomes()) outcomes.push_back(std::move(o));
      }
      emit(eval::outcomes_to_json(outcomes).dump(2) + "\n", out);
      return 0;
    }
    if (*aggregate_cmd) {
      emit(eval::render_report(eval::aggregate(load_outcome_files(outcome_paths)), eval::ReportFormat::kJson), out);
      return 0;
    }
    if (*report_cmd) {
      eval::MetricsReport report;
      const auto first = nlohmann::json::parse(text::read_file(report_inputs.front().string()));
      if (report_inputs.size() == 1 && first.value("format", "") == "guided.metrics/1") {
        report = eval::report_from_json(first);
      } else {
        report = eval::aggregate(load_outcome_files(report_inputs));
      }
      emit(eval::render_report(report, *eval::parse_report_format(format), !no_latency), out);
      return 0;
    }
    if (*plan_cmd) return plan_check(plan_path);
    if (*classify_cmd) return classify(instructions, lexicons);
  } catch (const Error& e) {
    spdlog::error("{}: {}", error_code_name(e.code()), e.what());
    return 2;
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return 2;
  }
  return 0;
}
