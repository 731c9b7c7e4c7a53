#include "guided/vision/live.hpp"

#include <cstdlib>

#include <fmt/format.h>
#include <fmt/ranges.h>
#include <httplib.h>
#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

#include "guided/codec.hpp"
#include "guided/error.hpp"
#include "guided/text.hpp"

namespace guided::vision {

using nlohmann::json;

namespace {

std::string png_base64(const Image& image) { return codec::base64_encode(encode_png(image)); }

json post_json(const EndpointConfig& cfg, const std::string& path, const httplib::Headers& headers,
               const json& body, std::stop_token stop) {
  httplib::Client client(cfg.endpoint);
  const auto secs = std::chrono::duration_cast<std::chrono::seconds>(cfg.timeout).count();
  client.set_connection_timeout(std::max<long long>(1, secs), 0);
  client.set_read_timeout(std::max<long long>(1, secs), 0);
  client.set_write_timeout(std::max<long long>(1, secs), 0);
  std::stop_callback abort(stop, [&client] { client.stop(); });
  auto res = client.Post(path, headers, body.dump(), "application/json");
  if (stop.stop_requested()) throw Error(ErrorCode::kCancelled, "request abandoned");
  if (!res) {
    const auto err = res.error();
    const ErrorCode code = err == httplib::Error::Read || err == httplib::Error::Write ||
                                   err == httplib::Error::ConnectionTimeout
                               ? ErrorCode::kProviderTimeout
                               : ErrorCode::kProviderError;
    throw Error(code, fmt::format("{} {}: {}", cfg.endpoint, path, httplib::to_string(err)));
  }
  if (res->status != 200) {
    throw Error(ErrorCode::kProviderError,
                fmt::format("{} {} returned HTTP {}: {}", cfg.endpoint, path, res->status, res->body.substr(0, 200)));
  }
  json doc = json::parse(res->body, nullptr, false);
  if (doc.is_discarded()) throw Error(ErrorCode::kProviderError, cfg.endpoint + path + " returned non-JSON");
  return doc;
}

class OpenAiChatBackend : public VisionBackend {
 public:
  OpenAiChatBackend(EndpointConfig cfg, std::set<Capability> caps) : cfg_(std::move(cfg)), caps_(std::move(caps)) {}
  std::string name() const override { return "openai_chat:" + cfg_.model; }
  std::set<Capability> capabilities() const override { return caps_; }

  ProviderReply call(const ProviderRequest& request, std::stop_token stop) override {
    json content = json::array({{{"type", "text"}, {"text", request.prompt}}});
    for (const auto& f : request.frames) {
      content.push_back({{"type", "image_url"},
                         {"image_url", {{"url", "data:image/png;base64," + png_base64(*f.image)}}}});
    }
    const json body{{"model", cfg_.model}, {"messages", json::array({{{"role", "user"}, {"content", content}}})}};
    const httplib::Headers headers{{"Authorization", "Bearer " + cfg_.api_key}};
    const json doc = post_json(cfg_, "/v1/chat/completions", headers, body, stop);
    try {
      const json& message = doc.at("choices").at(0).at("message");
      if (message.contains("refusal") && message.at("refusal").is_string()) {
        throw Error(ErrorCode::kProviderRefusal, message.at("refusal").get<std::string>());
      }
      return {message.at("content").get<std::string>(), std::nullopt};
    } catch (const json::exception& e) {
      throw Error(ErrorCode::kProviderError, std::string("unexpected chat completion shape: ") + e.what());
    }
  }

 private:
  EndpointConfig cfg_;
  std::set<Capability> caps_;
};

class GeminiBackend : public VisionBackend {
 public:
  GeminiBackend(EndpointConfig cfg, std::set<Capability> caps) : cfg_(std::move(cfg)), caps_(std::move(caps)) {}
  std::string name() const override { return "gemini:" + cfg_.model; }
  std::set<Capability> capabilities() const override { return caps_; }

  ProviderReply call(const ProviderRequest& request, std::stop_token stop) override {
    json parts = json::array({{{"text", request.prompt}}});
    for (const auto& f : request.frames) {
      parts.push_back({{"inline_data", {{"mime_type", "image/png"}, {"data", png_base64(*f.image)}}}});
    }
    const json body{{"contents", json::array({{{"role", "user"}, {"parts", parts}}})}};
    const httplib::Headers headers{{"x-goog-api-key", cfg_.api_key}};
    const json doc =
        post_json(cfg_, fmt::format("/v1beta/models/{}:generateContent", cfg_.model), headers, body, stop);
    if (doc.contains("promptFeedback") && doc.at("promptFeedback").contains("blockReason")) {
      throw Error(ErrorCode::kProviderRefusal, "blocked: " + doc.at("promptFeedback").at("blockReason").dump());
    }
    try {
      const json& candidate = doc.at("candidates").at(0);
      if (candidate.value("finishReason", "") == "SAFETY") throw Error(ErrorCode::kProviderRefusal, "blocked: SAFETY");
      std::string text;
      for (const auto& p : candidate.at("content").at("parts")) text += p.value("text", "");
      return {text, std::nullopt};
    } catch (const json::exception& e) {
      throw Error(ErrorCode::kProviderError, std::string("unexpected generateContent shape: ") + e.what());
    }
  }

 private:
  EndpointConfig cfg_;
  std::set<Capability> caps_;
};

class SegmentationHttpBackend : public VisionBackend {
 public:
  explicit SegmentationHttpBackend(EndpointConfig cfg) : cfg_(std::move(cfg)) {}
  std::string name() const override { return "segmentation_http:" + cfg_.endpoint; }
  std::set<Capability> capabilities() const override { return {Capability::kSegmentation}; }

  ProviderReply call(const ProviderRequest& request, std::stop_token stop) override {
    if (request.frames.empty() || !request.box) {
      throw Error(ErrorCode::kInvalidArgument, "segmentation request needs a frame and a box");
    }
    const auto& b = *request.box;
    const json body{{"image_png", png_base64(*request.frames.front().image)},
                    {"box", {b.y_min, b.x_min, b.y_max, b.x_max}}};
    const json doc = post_json(cfg_, "/segment", {}, body, stop);
    if (!doc.contains("mask_png") || !doc.at("mask_png").is_string()) {
      throw Error(ErrorCode::kProviderError, "segmentation reply has no mask_png");
    }
    if (doc.contains("latency")) spdlog::debug("segmentation service latency {} s", doc.at("latency").dump());
    return {{}, decode_png(codec::base64_decode(doc.at("mask_png").get<std::string>()))};
  }

 private:
  EndpointConfig cfg_;
};

}  // namespace

BackendPtr make_openai_chat_backend(EndpointConfig config, std::set<Capability> capabilities) {
  return std::make_shared<OpenAiChatBackend>(std::move(config), std::move(capabilities));
}

BackendPtr make_gemini_backend(EndpointConfig config, std::set<Capability> capabilities) {
  return std::make_shared<GeminiBackend>(std::move(config), std::move(capabilities));
}

BackendPtr make_segmentation_http_backend(EndpointConfig config) {
  return std::make_shared<SegmentationHttpBackend>(std::move(config));
}

std::string RoutingBackend::name() const {
  std::vector<std::string> parts;
  for (const auto& [c, b] : routes_) parts.push_back(fmt::format("{}={}", capability_name(c), b->name()));
  return fmt::format("routes({})", fmt::join(parts, ","));
}

std::set<Capability> RoutingBackend::capabilities() const {
  std::set<Capability> caps;
  for (const auto& [c, b] : routes_) caps.insert(c);
  return caps;
}

ProviderReply RoutingBackend::call(const ProviderRequest& request, std::stop_token stop) {
  auto it = routes_.find(request.capability);
  if (it == routes_.end()) {
    throw Error(ErrorCode::kMissingCapability, fmt::format("no route for {}", capability_name(request.capability)));
  }
  return it->second->call(request, stop);
}

std::optional<std::string> process_env(const std::string& name) {
  const char* v = std::getenv(name.c_str());
  if (v == nullptr || *v == '\0') return std::nullopt;
  return std::string(v);
}

ProviderSetup provider_config_from_json(const json& doc, const EnvLookup& env) {
  ProviderSetup setup;
  try {
    setup.gateway.timeout =
        std::chrono::milliseconds(static_cast<long long>(1000.0 * doc.value("timeout_s", 30.0)));
    setup.gateway.max_in_flight = doc.value("max_in_flight", 4);
    if (doc.contains("retry")) {
      const json& r = doc.at("retry");
      setup.gateway.retry.plan_retries = r.value("plan_retries", setup.gateway.retry.plan_retries);
      setup.gateway.retry.other_retries = r.value("other_retries", setup.gateway.retry.other_retries);
      setup.gateway.retry.backoff_base_s = r.value("backoff_base_s", setup.gateway.retry.backoff_base_s);
    }
    setup.gateway.validate();

    std::map<std::string, std::set<Capability>> wanted;
    for (const auto& [cap_name, backend_name] : doc.at("routes").items()) {
      const auto cap = parse_capability(cap_name);
      if (!cap) throw Error(ErrorCode::kConfigError, "unknown capability in routes: " + cap_name);
      wanted[backend_name.get<std::string>()].insert(*cap);
    }

    auto routing = std::make_shared<RoutingBackend>();
    for (const auto& [backend_name, caps] : wanted) {
      if (!doc.at("backends").contains(backend_name)) {
        throw Error(ErrorCode::kConfigError, "route names undefined backend '" + backend_name + "'");
      }
      const json& b = doc.at("backends").at(backend_name);
      EndpointConfig ep;
      ep.kind = b.at("kind").get<std::string>();
      ep.endpoint = b.at("endpoint").get<std::string>();
      ep.model = b.value("model", "");
      ep.api_key_env = b.value("api_key_env", "");
      ep.timeout = setup.gateway.timeout;
      if (!ep.api_key_env.empty()) {
        auto key = env(ep.api_key_env);
        if (!key) {
          throw Error(ErrorCode::kConfigError,
                      fmt::format("backend '{}' needs environment variable {}", backend_name, ep.api_key_env));
        }
        ep.api_key = *key;
      }
      BackendPtr backend;
      if (ep.kind == "openai_chat") backend = make_openai_chat_backend(ep, caps);
      else if (ep.kind == "gemini") backend = make_gemini_backend(ep, caps);
      else if (ep.kind == "segmentation_http") backend = make_segmentation_http_backend(ep);
      else throw Error(ErrorCode::kConfigError, "unknown backend kind '" + ep.kind + "'");
      for (Capability c : caps) routing->route(c, backend);
    }
    setup.backend = routing;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kConfigError, std::string("provider config: ") + e.what());
  }
  return setup;
}

ProviderSetup load_provider_config(const std::filesystem::path& path, const EnvLookup& env) {
  json doc = json::parse(text::read_file(path.string()), nullptr, false);
  if (doc.is_discarded()) throw Error(ErrorCode::kConfigError, path.string() + " is not JSON");
  return provider_config_from_json(doc, env);
}

}  // namespace guided::vision
