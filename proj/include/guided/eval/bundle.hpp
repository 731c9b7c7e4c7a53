#pragma once

#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "guided/eval/outcome.hpp"
#include "guided/geometry/box.hpp"
#include "guided/geometry/scene.hpp"

namespace guided::eval {

// What a step should have produced, from the bundle's labels.json.
struct StepLabel {
  plan::VisualType expected_type = plan::VisualType::kHighlight;
  std::string expected_component;
  bool instruction_correct = false;  // human verdict
  std::optional<bool> guidance_correct;  // human verdict; nullopt: not assessed
  // Expected provider outputs, all optional:
  std::optional<geometry::BoundingBox2D> box;
  std::optional<geometry::Point2> target;
  std::optional<std::pair<std::string, std::string>> rotation;  // ("x", "CCW")
  std::optional<std::string> gesture;
  std::optional<std::string> tool;
  std::optional<std::vector<std::string>> kinds;
  std::map<ComponentId, bool> components;  // human verdicts per component

  Category category() const;
};

// A recorded task: scenes, the provider replies to replay, and labels.
//
//   <dir>/bundle.json   {"format": "guided.bundle/1", "bundle_id", "query",
//                        "initial_scene", "steps": [{"scene"}], "provider"}
//   <dir>/plan.json     the plan document
//   <dir>/labels.json   {"steps": [{"expected_visual_type", "expected_key_component",
//                        "instruction_correct", "guidance_correct",
//                        "expected": {"box", "target", "rotation", "gesture", "tool", "kinds"},
//                        "components": {"<component>": bool}}]}
//   <dir>/scenes/<id>/  meta.json, image.png, depth.f32
//   <dir>/<provider>/   mock fixture (index.json)
//
// Labels cover every plan step. Format errors raise Error(kBundleFormat)
// naming the file and field.
class FixtureBundle {
 public:
  static FixtureBundle load(const std::filesystem::path& dir);
  // Every bundle directory directly under `root`, sorted by name.
  static std::vector<FixtureBundle> load_all(const std::filesystem::path& root);

  const std::filesystem::path& dir() const { return dir_; }
  const std::string& bundle_id() const { return bundle_id_; }
  const std::string& query() const { return query_; }
  const std::string& initial_scene() const { return initial_scene_; }
  const std::vector<std::string>& step_scenes() const { return step_scenes_; }
  const nlohmann::json& plan_document() const { return plan_document_; }
  const std::vector<StepLabel>& labels() const { return labels_; }
  std::filesystem::path provider_dir() const { return dir_ / provider_; }

  // Loaded on first use and shared afterwards. Thread-safe.
  geometry::SnapshotPtr scene(const std::string& id) const;

 private:
  std::filesystem::path dir_;
  std::string bundle_id_;
  std::string query_;
  std::string initial_scene_;
  std::vector<std::string> step_scenes_;
  nlohmann::json plan_document_;
  std::vector<StepLabel> labels_;
  std::string provider_;

  struct Cache {
    std::mutex mu;
    std::map<std::string, geometry::SnapshotPtr> scenes;
  };
  std::shared_ptr<Cache> cache_ = std::make_shared<Cache>();
};

}  // namespace guided::eval
