#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <vector>

#include "tapush/geometry.hpp"
#include "tapush/rng.hpp"

namespace tapush {

// ---------------------------------------------------------------------------
// Robot and control

/// Joint order shared by RobotState velocities, Control and per-joint parameter vectors.
enum Joint : std::size_t { kJointX = 0, kJointY = 1, kJointRot = 2, kJointGrip = 3 };
inline constexpr std::size_t kNumJoints = 4;
using JointVector = std::array<double, kNumJoints>;

struct RobotState {
  Vec2 position{0.0, 0.0};   // m
  double rotation = 0.0;     // rad, (-pi, pi]
  double opening = 0.0;      // m, gap between the fingers
  Vec2 velocity{0.0, 0.0};   // m/s
  double angular_velocity = 0.0;  // rad/s
  double opening_rate = 0.0;      // m/s
};

/// One action: joint velocities held for `duration` seconds.
struct Control {
  JointVector velocity{0.0, 0.0, 0.0, 0.0};
  double duration = 1.0;

  double norm() const;
};

using ControlSequence = std::vector<Control>;

struct SpeedLimits {
  JointVector max{1.0, 1.0, kPi, 0.2};

  Control clamp(Control u) const;
};

// ---------------------------------------------------------------------------
// Objects

enum class ShapeKind { kDisc, kBox };

struct Shape {
  ShapeKind kind = ShapeKind::kDisc;
  double radius = 0.05;                 // disc
  Vec2 half_extents{0.05, 0.05};        // box
  double height = 0.04;                 // informational; the simulation is planar

  static Shape disc(double r, double h = 0.04) { return {ShapeKind::kDisc, r, {r, r}, h}; }
  static Shape box(double hx, double hy, double h = 0.04) { return {ShapeKind::kBox, 0.0, {hx, hy}, h}; }

  /// Radius of the smallest circle around the center enclosing the shape.
  double bounding_radius() const { return kind == ShapeKind::kDisc ? radius : half_extents.norm(); }
  /// Half of the shape's extent along the world direction `dir` for heading `heading`.
  double support_extent(const Vec2& dir, double heading) const;
  /// Polar moment of inertia per unit mass.
  double inertia_per_mass() const;
};

struct ObjectState {
  Shape shape;
  double mass = 0.5;        // kg
  double friction = 0.4;    // surface friction coefficient
  Vec2 position{0.0, 0.0};
  double heading = 0.0;
  Vec2 velocity{0.0, 0.0};
  double angular_velocity = 0.0;
  bool fallen = false;
};

struct WorldState {
  RobotState robot;
  std::vector<ObjectState> objects;
  double time = 0.0;  // s
};

// ---------------------------------------------------------------------------
// Static scene

struct Goal {
  Vec2 center{0.0, 0.0};
  double radius = 0.1;
};

/// Tabletop: union of axis-aligned rectangles (rectangle, strip, L-shape...), static
/// rectangular obstacles, a safe-zone inset and an optional circular goal.
struct TableSpec {
  std::vector<Rect> regions;
  double safe_margin = 0.05;
  std::vector<Rect> obstacles;
  std::optional<Goal> goal;

  /// Closed-region membership.
  bool contains(const Vec2& p) const;
  /// Distance from p to the nearest boundary edge of the union.
  double distance_to_boundary(const Vec2& p) const;
  /// True iff p is on the table, at least `safe_margin` from the boundary and from
  /// every static obstacle.
  bool in_safe_zone(const Vec2& p) const;
  /// Edges of the union's outline (pieces of rectangle edges not interior to another
  /// rectangle).
  std::vector<Segment> boundary_segments() const;
  Rect bounds() const;

  void validate() const;
};

/// Planar gripper: a palm with two parallel fingers pointing along the local +x axis.
struct RobotGeometry {
  double palm_half_depth = 0.01;
  double finger_length = 0.08;
  double finger_half_thickness = 0.006;
  double max_opening = 0.16;
  double friction = 0.5;  // robot-object contact friction

  double palm_half_width() const { return 0.5 * max_opening + 2.0 * finger_half_thickness; }
  /// Midpoint between the fingertips, in the robot frame.
  Vec2 reference_point_local() const { return {palm_half_depth + finger_length, 0.0}; }
};

struct PhysicsParams {
  double substep = 0.002;               // s
  double gravity = 9.81;                // m/s^2
  double penetration_slop = 0.001;      // m, allowed overlap after resolution
  double speculative_distance = 0.004;  // m
  double rest_linear_speed = 1e-3;      // m/s
  double rest_angular_speed = 1e-2;     // rad/s
  int velocity_iterations = 8;
  int position_iterations = 8;
  double obstacle_friction = 0.5;
};

struct WorldModel {
  TableSpec table;
  RobotGeometry robot;
  PhysicsParams physics;
  SpeedLimits limits;
};

// ---------------------------------------------------------------------------
// Noise

/// Action-dependent velocity noise: standard deviation b * ||u|| per sub-step, scaled
/// per channel.
struct NoiseModel {
  double b = 0.0;
  double linear_scale = 1.0;   // m/s channels
  double angular_scale = 1.0;  // rad/m, rotational channels

  double sigma(const Control& u) const { return b * u.norm(); }
};

// ---------------------------------------------------------------------------
// Stepping

struct StepDiagnostics {
  std::uint64_t substeps = 0;
  double max_penetration = 0.0;  // worst overlap left after any sub-step's resolution
  std::uint64_t contact_substeps = 0;
};

/// Called after every simulated sub-step with the current state.
using FrameSink = std::function<void(const WorldState&)>;

class PhysicsError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

WorldState step_deterministic(const WorldModel& model, const WorldState& state, const Control& control,
                              StepDiagnostics* diag = nullptr, const FrameSink* sink = nullptr);

WorldState step_stochastic(const WorldModel& model, const WorldState& state, const Control& control,
                           const NoiseModel& noise, RngStream& rng, StepDiagnostics* diag = nullptr,
                           const FrameSink* sink = nullptr);

/// Zero-control simulation for up to `t_rest` seconds, stopping early once at rest.
WorldState settle(const WorldModel& model, const WorldState& state, double t_rest,
                  StepDiagnostics* diag = nullptr, const FrameSink* sink = nullptr);

/// Adds one sub-step's worth of noise with standard deviation `sigma` to every robot
/// and object velocity channel.
void inject_velocity_noise(WorldState& state, double sigma, const NoiseModel& noise, RngStream& rng);

// ---------------------------------------------------------------------------
// Predicates and helpers

bool off_table(const ObjectState& object, const TableSpec& table);
bool in_goal(const ObjectState& object, const TableSpec& table);
bool grasped(const WorldModel& model, const WorldState& state, std::size_t target);

bool at_rest(const WorldModel& model, const WorldState& state);
double kinetic_energy(const WorldState& state);
/// Largest current overlap between any robot part/object/obstacle pair.
double max_penetration(const WorldModel& model, const WorldState& state);

Vec2 gripper_reference_point(const RobotGeometry& geometry, const RobotState& robot);
Vec2 gripper_forward(const RobotState& robot);

/// Throws PhysicsError if any state component is non-finite or out of its domain.
void validate_state(const WorldModel& model, const WorldState& state);

}  // namespace tapush
