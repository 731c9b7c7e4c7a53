#pragma once

#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>

#include "guided/vision/backend.hpp"
#include "guided/vision/gateway.hpp"

namespace guided::vision {

struct EndpointConfig {
  std::string kind;         // "openai_chat", "gemini", "segmentation_http"
  std::string endpoint;     // scheme://host[:port]
  std::string model;
  std::string api_key_env;  // name of the variable holding the key
  std::string api_key;      // resolved value; never logged
  std::chrono::milliseconds timeout{30000};
};

// Chat-completions style API: one user message with text and PNG parts.
BackendPtr make_openai_chat_backend(EndpointConfig config, std::set<Capability> capabilities);
// generateContent style API.
BackendPtr make_gemini_backend(EndpointConfig config, std::set<Capability> capabilities);
// POST /segment {"image_png": base64, "box": [y0, x0, y1, x1]}
//   -> {"mask_png": base64, "latency": seconds}
BackendPtr make_segmentation_http_backend(EndpointConfig config);

// Dispatches each capability to the backend configured for it.
class RoutingBackend : public VisionBackend {
 public:
  void route(Capability c, BackendPtr backend) { routes_[c] = std::move(backend); }
  std::string name() const override;
  std::set<Capability> capabilities() const override;
  ProviderReply call(const ProviderRequest& request, std::stop_token stop) override;

 private:
  std::map<Capability, BackendPtr> routes_;
};

using EnvLookup = std::function<std::optional<std::string>(const std::string&)>;
std::optional<std::string> process_env(const std::string& name);

struct ProviderSetup {
  GatewayConfig gateway;
  BackendPtr backend;
};

// Provider config document:
//   {"timeout_s": 30, "max_in_flight": 4,
//    "retry": {"plan_retries": 2, "other_retries": 1, "backoff_base_s": 0.5},
//    "backends": {"<name>": {"kind", "endpoint", "model", "api_key_env"}},
//    "routes": {"plan": "<name>", "bbox": ..., "translation": ..., "rotation": ..., "segmentation": ...}}
// Throws Error(kConfigError) for unknown kinds, dangling routes or unset keys.
ProviderSetup load_provider_config(const std::filesystem::path& path, const EnvLookup& env = process_env);
ProviderSetup provider_config_from_json(const nlohmann::json& doc, const EnvLookup& env = process_env);

}  // namespace guided::vision
