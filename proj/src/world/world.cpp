#include "tapush/world.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace tapush {

double Control::norm() const {
  double sum = 0.0;
  for (double v : velocity) {
    sum += v * v;
  }
  return std::sqrt(sum);
}

Control SpeedLimits::clamp(Control u) const {
  for (std::size_t j = 0; j < kNumJoints; ++j) {
    u.velocity[j] = std::clamp(u.velocity[j], -max[j], max[j]);
  }
  return u;
}

double Shape::support_extent(const Vec2& dir, double heading) const {
  if (kind == ShapeKind::kDisc) {
    return radius;
  }
  const Vec2 d = tapush::rotate(dir, -heading);
  return std::abs(d.x()) * half_extents.x() + std::abs(d.y()) * half_extents.y();
}

double Shape::inertia_per_mass() const {
  if (kind == ShapeKind::kDisc) {
    return 0.5 * radius * radius;
  }
  return (half_extents.x() * half_extents.x() + half_extents.y() * half_extents.y()) / 3.0;
}

// ---------------------------------------------------------------------------
// TableSpec

bool TableSpec::contains(const Vec2& p) const {
  for (const Rect& r : regions) {
    if (r.contains(p)) {
      return true;
    }
  }
  return false;
}

namespace {

struct Interval {
  double lo;
  double hi;
};

void subtract(std::vector<Interval>& pieces, double lo, double hi) {
  std::vector<Interval> next;
  for (const Interval& iv : pieces) {
    if (hi <= iv.lo || lo >= iv.hi) {
      next.push_back(iv);
      continue;
    }
    if (lo > iv.lo) {
      next.push_back({iv.lo, lo});
    }
    if (hi < iv.hi) {
      next.push_back({hi, iv.hi});
    }
  }
  pieces = std::move(next);
}

}  // namespace

std::vector<Segment> TableSpec::boundary_segments() const {
  std::vector<Segment> out;
  for (std::size_t i = 0; i < regions.size(); ++i) {
    const Rect& r = regions[i];
    // Horizontal edges: bottom (outward -y) and top (outward +y).
    for (int side = 0; side < 2; ++side) {
      const double y = side == 0 ? r.min.y() : r.max.y();
      std::vector<Interval> pieces{{r.min.x(), r.max.x()}};
      for (std::size_t j = 0; j < regions.size(); ++j) {
        if (j == i) {
          continue;
        }
        const Rect& o = regions[j];
        const bool covers_outside = side == 0 ? (o.min.y() < y && y <= o.max.y())
                                              : (o.min.y() <= y && y < o.max.y());
        if (covers_outside) {
          subtract(pieces, o.min.x(), o.max.x());
        }
      }
      for (const Interval& iv : pieces) {
        if (iv.hi > iv.lo) {
          out.push_back({{iv.lo, y}, {iv.hi, y}});
        }
      }
    }
    // Vertical edges: left (outward -x) and right (outward +x).
    for (int side = 0; side < 2; ++side) {
      const double x = side == 0 ? r.min.x() : r.max.x();
      std::vector<Interval> pieces{{r.min.y(), r.max.y()}};
      for (std::size_t j = 0; j < regions.size(); ++j) {
        if (j == i) {
          continue;
        }
        const Rect& o = regions[j];
        const bool covers_outside = side == 0 ? (o.min.x() < x && x <= o.max.x())
                                              : (o.min.x() <= x && x < o.max.x());
        if (covers_outside) {
          subtract(pieces, o.min.y(), o.max.y());
        }
      }
      for (const Interval& iv : pieces) {
        if (iv.hi > iv.lo) {
          out.push_back({{x, iv.lo}, {x, iv.hi}});
        }
      }
    }
  }
  return out;
}

double TableSpec::distance_to_boundary(const Vec2& p) const {
  double best = std::numeric_limits<double>::infinity();
  for (const Segment& s : boundary_segments()) {
    best = std::min(best, distance_to_segment(p, s));
  }
  return best;
}

bool TableSpec::in_safe_zone(const Vec2& p) const {
  if (!contains(p) || distance_to_boundary(p) < safe_margin) {
    return false;
  }
  for (const Rect& o : obstacles) {
    if (o.distance_to(p) < safe_margin) {
      return false;
    }
  }
  return true;
}

Rect TableSpec::bounds() const {
  Rect b{{std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity()},
         {-std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()}};
  for (const Rect& r : regions) {
    b.min = b.min.cwiseMin(r.min);
    b.max = b.max.cwiseMax(r.max);
  }
  return b;
}

void TableSpec::validate() const {
  if (regions.empty()) {
    throw std::invalid_argument("table needs at least one region");
  }
  for (const Rect& r : regions) {
    if (!(r.max.x() > r.min.x() && r.max.y() > r.min.y())) {
      throw std::invalid_argument("table region with non-positive extent");
    }
  }
  if (!(safe_margin > 0.0)) {
    throw std::invalid_argument("safe-zone margin must be positive");
  }
  bool any_safe = false;
  for (const Rect& r : regions) {
    const Vec2 h = r.half_extents();
    if (h.x() > safe_margin && h.y() > safe_margin) {
      any_safe = true;
    }
  }
  if (!any_safe) {
    throw std::invalid_argument("safe-zone margin leaves no safe region on the table");
  }
  if (goal && !(goal->radius > 0.0)) {
    throw std::invalid_argument("goal radius must be positive");
  }
}

// ---------------------------------------------------------------------------
// Predicates

bool off_table(const ObjectState& object, const TableSpec& table) { return !table.contains(object.position); }

bool in_goal(const ObjectState& object, const TableSpec& table) {
  if (!table.goal) {
    throw std::logic_error("in_goal called on a scene without a goal region");
  }
  if (object.fallen || off_table(object, table)) {
    return false;
  }
  return (object.position - table.goal->center).norm() <= table.goal->radius;
}

Vec2 gripper_forward(const RobotState& robot) { return {std::cos(robot.rotation), std::sin(robot.rotation)}; }

Vec2 gripper_reference_point(const RobotGeometry& geometry, const RobotState& robot) {
  return robot.position + rotate(geometry.reference_point_local(), robot.rotation);
}

bool grasped(const WorldModel& model, const WorldState& state, std::size_t target) {
  if (target >= state.objects.size()) {
    throw std::out_of_range("grasp target index " + std::to_string(target) + " out of range");
  }
  const ObjectState& obj = state.objects[target];
  if (obj.fallen) {
    return false;
  }
  const RobotGeometry& g = model.robot;
  const Frame robot_frame(state.robot.position, state.robot.rotation);
  const Vec2 local = robot_frame.to_local(obj.position);
  const double opening = state.robot.opening;
  const bool between = local.x() >= g.palm_half_depth && local.x() <= g.palm_half_depth + g.finger_length &&
                       std::abs(local.y()) <= 0.5 * opening;
  if (!between) {
    return false;
  }
  const Vec2 lateral = robot_frame.rotate({0.0, 1.0});
  const double width = 2.0 * obj.shape.support_extent(lateral, obj.heading);
  return opening > width;
}

bool at_rest(const WorldModel& model, const WorldState& state) {
  for (const ObjectState& o : state.objects) {
    if (o.fallen) {
      continue;
    }
    if (o.velocity.norm() >= model.physics.rest_linear_speed ||
        std::abs(o.angular_velocity) >= model.physics.rest_angular_speed) {
      return false;
    }
  }
  return true;
}

double kinetic_energy(const WorldState& state) {
  double e = 0.0;
  for (const ObjectState& o : state.objects) {
    if (o.fallen) {
      continue;
    }
    e += 0.5 * o.mass * o.velocity.squaredNorm();
    e += 0.5 * o.mass * o.shape.inertia_per_mass() * o.angular_velocity * o.angular_velocity;
  }
  return e;
}

void validate_state(const WorldModel& model, const WorldState& state) {
  auto finite = [](double v) { return std::isfinite(v); };
  const RobotState& r = state.robot;
  if (!finite(r.position.x()) || !finite(r.position.y()) || !finite(r.rotation) || !finite(r.opening) ||
      !finite(r.velocity.x()) || !finite(r.velocity.y()) || !finite(r.angular_velocity) ||
      !finite(r.opening_rate) || !finite(state.time)) {
    throw PhysicsError("non-finite robot state");
  }
  if (r.opening < -1e-12 || r.opening > model.robot.max_opening + 1e-12) {
    throw PhysicsError("gripper opening outside [0, max_opening]");
  }
  for (std::size_t i = 0; i < state.objects.size(); ++i) {
    const ObjectState& o = state.objects[i];
    const std::string tag = "object " + std::to_string(i) + ": ";
    if (!finite(o.position.x()) || !finite(o.position.y()) || !finite(o.heading) || !finite(o.velocity.x()) ||
        !finite(o.velocity.y()) || !finite(o.angular_velocity)) {
      throw PhysicsError(tag + "non-finite state");
    }
    if (!(o.mass > 0.0) || !(o.friction >= 0.0)) {
      throw PhysicsError(tag + "mass must be > 0 and friction >= 0");
    }
    const bool dims_ok = o.shape.kind == ShapeKind::kDisc
                             ? o.shape.radius > 0.0
                             : (o.shape.half_extents.x() > 0.0 && o.shape.half_extents.y() > 0.0);
    if (!dims_ok) {
      throw PhysicsError(tag + "shape dimensions must be positive");
    }
  }
}

}  // namespace tapush
