#include "tapush/scenes.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace tapush {

namespace {

constexpr double kTableLength = 0.6;
constexpr double kWideHalfWidth = 0.3;
constexpr double kStripHalfWidth = 0.075;
constexpr double kGoalY = 0.45;
constexpr double kLowAccuracyGoalRadius = 0.12;
constexpr double kHighAccuracyGoalRadius = 0.04;
// Pushing is done with the gripper fully open, so the object sits between the fingers.
constexpr double kPushOpening = 0.085;
constexpr double kGraspOpening = 0.16;

}  // namespace

std::string_view to_string(Accuracy accuracy) { return accuracy == Accuracy::kHigh ? "high" : "low"; }

Accuracy parse_accuracy(std::string_view name) {
  if (name == "high") {
    return Accuracy::kHigh;
  }
  if (name == "low") {
    return Accuracy::kLow;
  }
  throw std::invalid_argument("unknown accuracy level '" + std::string(name) + "'");
}

ObjectState sample_object(RngStream& rng, const ObjectRanges& r) {
  ObjectState o;
  if (rng.uniform(0.0, 1.0) < 0.5) {
    const double hx = rng.uniform(r.box_half_min, r.box_half_max);
    const double hy = rng.uniform(r.box_half_min, r.box_half_max);
    o.shape = Shape::box(hx, hy, rng.uniform(r.box_height_min, r.box_height_max));
  } else {
    const double radius = rng.uniform(r.disc_radius_min, r.disc_radius_max);
    o.shape = Shape::disc(radius, rng.uniform(r.disc_height_min, r.disc_height_max));
  }
  o.mass = rng.uniform(r.mass_min, r.mass_max);
  o.friction = rng.uniform(r.friction_min, r.friction_max);
  return o;
}

TableSpec push_table(Accuracy accuracy) {
  TableSpec t;
  const double half = accuracy == Accuracy::kHigh ? kStripHalfWidth : kWideHalfWidth;
  t.regions = {Rect{{-half, 0.0}, {half, kTableLength}}};
  const double radius = accuracy == Accuracy::kHigh ? kHighAccuracyGoalRadius : kLowAccuracyGoalRadius;
  t.goal = Goal{{0.0, kGoalY}, radius};
  return t;
}

RobotState robot_behind(const ObjectState& object, double gap) {
  const RobotGeometry g;
  RobotState r;
  r.rotation = kPi / 2.0;
  r.opening = kPushOpening;
  const double back = object.shape.support_extent({0.0, 1.0}, object.heading);
  const double width = 2.0 * object.shape.support_extent({1.0, 0.0}, object.heading);
  // Palm face behind the object when it fits between the fingers, fingertips otherwise.
  const double face = width < r.opening ? g.palm_half_depth : g.reference_point_local().x();
  r.position = {object.position.x(), object.position.y() - back - gap - face};
  return r;
}

SceneSpec generate_push_scene(Accuracy accuracy, std::uint64_t seed, const PushSceneOptions& options) {
  RngStream rng(seed);
  SceneSpec s;
  s.name = std::string(to_string(accuracy)) + "-accuracy";
  s.table = push_table(accuracy);
  s.task = TaskKind::kPush;
  s.b = options.b;
  ObjectState o = sample_object(rng, options.ranges);
  double y;
  do {
    y = options.position_mean + options.position_std * rng.normal();
  } while (y < 0.0 || y > kTableLength);
  o.position = {0.0, y};
  s.objects = {o};
  s.robot = robot_behind(o);
  s.validate();
  return s;
}

SceneSpec generate_clutter_scene(std::size_t num_objects, std::uint64_t seed, const ObjectRanges& ranges) {
  if (num_objects < 1) {
    throw std::invalid_argument("clutter scene needs at least one object");
  }
  RngStream rng(seed);
  SceneSpec s;
  s.name = "clutter";
  s.table.regions = {Rect{{-kWideHalfWidth, 0.0}, {kWideHalfWidth, kTableLength}}};
  s.task = TaskKind::kGrasp;
  s.target = 0;
  constexpr int kAttemptsPerObject = 1000;
  constexpr double kClearance = 0.002;
  // Keep the band in front of the robot free so it starts out of contact.
  constexpr double kLowestY = 0.12;
  for (std::size_t i = 0; i < num_objects; ++i) {
    ObjectState o = sample_object(rng, ranges);
    if (o.shape.kind == ShapeKind::kBox) {
      o.heading = normalize_angle(rng.uniform(0.0, 2.0 * kPi));
    }
    const double r = o.shape.bounding_radius();
    bool placed = false;
    for (int attempt = 0; attempt < kAttemptsPerObject && !placed; ++attempt) {
      o.position = {rng.uniform(-kWideHalfWidth + r, kWideHalfWidth - r), rng.uniform(kLowestY, kTableLength - r)};
      placed = true;
      for (const ObjectState& p : s.objects) {
        const std::vector<ObjectState> pair{p, o};
        if (min_object_clearance(pair) < kClearance) {
          placed = false;
          break;
        }
      }
    }
    if (!placed) {
      throw std::runtime_error("could not place clutter object " + std::to_string(i) + " after " +
                               std::to_string(kAttemptsPerObject) + " attempts");
    }
    s.objects.push_back(o);
  }
  s.robot.position = {0.0, -0.1};
  s.robot.rotation = kPi / 2.0;
  s.robot.opening = kGraspOpening;
  s.validate();
  return s;
}

// ---------------------------------------------------------------------------
// Presets

namespace {

ObjectState preset_disc(Vec2 p, double radius, double mass = 0.4, double friction = 0.4) {
  ObjectState o;
  o.shape = Shape::disc(radius, 0.045);
  o.mass = mass;
  o.friction = friction;
  o.position = p;
  return o;
}

ObjectState preset_box(Vec2 p, double hx, double hy, double heading, double mass = 0.4, double friction = 0.4) {
  ObjectState o;
  o.shape = Shape::box(hx, hy, 0.04);
  o.mass = mass;
  o.friction = friction;
  o.position = p;
  o.heading = heading;
  return o;
}

SceneSpec push_preset(std::string name, TableSpec table, ObjectState object, double b) {
  SceneSpec s;
  s.name = std::move(name);
  s.table = std::move(table);
  s.objects = {object};
  s.robot = robot_behind(object);
  s.task = TaskKind::kPush;
  s.b = b;
  return s;
}

}  // namespace

const std::vector<std::string_view>& preset_names() {
  static const std::vector<std::string_view> names{"strip", "wide", "l-shape", "changing", "clutter-grasp"};
  return names;
}

SceneSpec preset_scene(std::string_view name) {
  SceneSpec s;
  if (name == "strip") {
    s = push_preset("strip", push_table(Accuracy::kHigh), preset_disc({0.0, 0.1}, 0.05), 0.075);
  } else if (name == "wide") {
    s = push_preset("wide", push_table(Accuracy::kLow), preset_box({0.0, 0.1}, 0.06, 0.055, 0.0), 0.075);
  } else if (name == "l-shape") {
    TableSpec t;
    t.regions = {Rect{{-0.3, 0.0}, {0.3, 0.3}}, Rect{{0.0, 0.3}, {0.3, 0.6}}};
    t.goal = Goal{{0.15, 0.47}, 0.06};
    s = push_preset("l-shape", std::move(t), preset_disc({0.15, 0.1}, 0.05), 0.075);
  } else if (name == "changing") {
    TableSpec t;
    t.regions = {Rect{{-0.3, 0.0}, {0.3, 0.4}}, Rect{{-kStripHalfWidth, 0.4}, {kStripHalfWidth, 1.0}}};
    t.goal = Goal{{0.0, 0.9}, kHighAccuracyGoalRadius};
    s = push_preset("changing", std::move(t), preset_disc({0.0, 0.1}, 0.05), 0.1);
  } else if (name == "clutter-grasp") {
    s.name = "clutter-grasp";
    s.table.regions = {Rect{{-0.3, 0.0}, {0.3, 0.6}}};
    s.task = TaskKind::kGrasp;
    s.target = 0;
    s.b = 0.05;
    s.objects = {
        preset_disc({0.05, 0.5}, 0.045, 0.3, 0.4),               // target, close to the far edge
        preset_box({-0.1, 0.42}, 0.05, 0.06, 0.4, 0.5, 0.5),
        preset_disc({0.2, 0.45}, 0.05, 0.4, 0.3),
        preset_box({0.05, 0.3}, 0.055, 0.05, 0.2, 0.6, 0.4),
        preset_disc({-0.2, 0.25}, 0.06, 0.5, 0.5),
        preset_box({0.22, 0.22}, 0.05, 0.05, 0.7, 0.3, 0.3),
    };
    s.robot.position = {0.0, -0.1};
    s.robot.rotation = kPi / 2.0;
    s.robot.opening = kGraspOpening;
  } else {
    std::string known;
    for (std::string_view n : preset_names()) {
      known += (known.empty() ? "" : ", ") + std::string(n);
    }
    throw std::invalid_argument("unknown preset '" + std::string(name) + "' (known: " + known + ")");
  }
  s.validate();
  return s;
}

}  // namespace tapush
