#pragma once

#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>

#include "guided/guidance/primitive.hpp"

namespace guided::guidance {

// Asset manifest document:
//   {"conventions": {...}, "assets": {"gesture/pinch": {"mesh": "meshes/gesture_pinch.obj"}, ...}}
// Meshes put the contact point at the origin; tools point their functional
// end along local -y.
class AssetLibrary {
 public:
  static AssetLibrary load(const std::filesystem::path& manifest);
  // data/assets/manifest.json
  static const AssetLibrary& shipped();

  std::optional<AssetRef> find(std::string_view library_id) const;
  bool contains(std::string_view library_id) const { return find(library_id).has_value(); }
  std::vector<std::string> ids() const;
  const std::filesystem::path& directory() const { return dir_; }

 private:
  std::filesystem::path dir_;
  std::map<std::string, std::string, std::less<>> meshes_;
};

std::string gesture_asset_id(plan::GestureKind g);      // "gesture/palm_press"
std::string tool_asset_id(std::string_view tool_name);  // "tool/hex_key"

// Produces an asset for a tool missing from the library. nullopt disables
// the fallback.
using GenerativeAssetHook = std::function<std::optional<AssetRef>(std::string_view tool_name)>;
// Always returns "generated/<tool>" backed by the placeholder mesh.
GenerativeAssetHook placeholder_asset_hook();

}  // namespace guided::guidance
