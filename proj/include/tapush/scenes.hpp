#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

#include "tapush/scene.hpp"

namespace tapush {

enum class Accuracy { kHigh, kLow };

std::string_view to_string(Accuracy accuracy);
Accuracy parse_accuracy(std::string_view name);

/// Sampling ranges for randomized objects, in meters, kilograms and friction units.
struct ObjectRanges {
  double box_half_min = 0.05;
  double box_half_max = 0.075;
  double box_height_min = 0.036;
  double box_height_max = 0.05;
  double disc_radius_min = 0.04;
  double disc_radius_max = 0.07;
  double disc_height_min = 0.04;
  double disc_height_max = 0.05;
  double mass_min = 0.2;
  double mass_max = 0.8;
  double friction_min = 0.2;
  double friction_max = 0.6;
};

struct PushSceneOptions {
  /// Standard deviation of the object's distance from the table's lower edge.
  double position_std = 0.1;
  double position_mean = 0.1;
  ObjectRanges ranges;
  double b = 0.0;
};

/// Random box or disc with its pose left at the origin.
ObjectState sample_object(RngStream& rng, const ObjectRanges& ranges = {});

/// Table and goal for the two push task layouts (object-free).
TableSpec push_table(Accuracy accuracy);

/// Robot placed behind `object` along +y with its fingertips `gap` meters away.
RobotState robot_behind(const ObjectState& object, double gap = 0.005);

SceneSpec generate_push_scene(Accuracy accuracy, std::uint64_t seed, const PushSceneOptions& options = {});

/// Grasp scene with `num_objects` non-overlapping random objects; object 0 is the target.
SceneSpec generate_clutter_scene(std::size_t num_objects, std::uint64_t seed, const ObjectRanges& ranges = {});

const std::vector<std::string_view>& preset_names();
SceneSpec preset_scene(std::string_view name);

}  // namespace tapush
