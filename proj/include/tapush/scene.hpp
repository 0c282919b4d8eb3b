#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"

#include "tapush/task.hpp"
#include "tapush/world.hpp"

namespace tapush {

/// Declarative scene: table, robot start, objects, task and uncertainty level.
struct SceneSpec {
  std::string name;
  TableSpec table;
  RobotState robot;
  std::vector<ObjectState> objects;
  TaskKind task = TaskKind::kPush;
  std::size_t target = 0;
  double b = 0.0;

  /// Throws std::invalid_argument naming the first violated invariant.
  void validate() const;
  WorldState initial_state() const;
};

/// Smallest signed distance between any two objects (negative when overlapping).
double min_object_clearance(const std::vector<ObjectState>& objects);

nlohmann::json to_json(const SceneSpec& scene);
SceneSpec scene_from_json(const nlohmann::json& j);

SceneSpec load_scene(const std::filesystem::path& path);
void save_scene(const SceneSpec& scene, const std::filesystem::path& path);

}  // namespace tapush
