#include "guided/guidance/assets.hpp"

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "guided/error.hpp"
#include "guided/paths.hpp"
#include "guided/text.hpp"

namespace guided::guidance {

AssetLibrary AssetLibrary::load(const std::filesystem::path& manifest) {
  AssetLibrary lib;
  lib.dir_ = manifest.parent_path();
  const auto doc = nlohmann::json::parse(text::read_file(manifest.string()), nullptr, false);
  if (doc.is_discarded() || !doc.contains("assets") || !doc.at("assets").is_object()) {
    throw Error(ErrorCode::kConfigError, manifest.string() + ": not an asset manifest");
  }
  for (const auto& [id, entry] : doc.at("assets").items()) {
    if (!entry.contains("mesh") || !entry.at("mesh").is_string()) {
      throw Error(ErrorCode::kConfigError, fmt::format("{}: asset '{}' has no mesh", manifest.string(), id));
    }
    lib.meshes_[id] = entry.at("mesh").get<std::string>();
  }
  return lib;
}

const AssetLibrary& AssetLibrary::shipped() {
  static const AssetLibrary lib = load(data_dir() / "assets" / "manifest.json");
  return lib;
}

std::optional<AssetRef> AssetLibrary::find(std::string_view library_id) const {
  auto it = meshes_.find(library_id);
  if (it == meshes_.end()) return std::nullopt;
  return AssetRef{it->first, it->second, false};
}

std::vector<std::string> AssetLibrary::ids() const {
  std::vector<std::string> out;
  for (const auto& [id, mesh] : meshes_) out.push_back(id);
  return out;
}

std::string gesture_asset_id(plan::GestureKind g) { return "gesture/" + std::string(plan::gesture_name(g)); }

std::string tool_asset_id(std::string_view tool_name) { return "tool/" + text::normalize_token(tool_name); }

GenerativeAssetHook placeholder_asset_hook() {
  return [](std::string_view tool_name) -> std::optional<AssetRef> {
    return AssetRef{"generated/" + text::normalize_token(tool_name), "meshes/placeholder.obj", true};
  };
}

}  // namespace guided::guidance
