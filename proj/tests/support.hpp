#pragma once

#include <bit>
#include <cstdint>

#include "tapush/world.hpp"

namespace tapush::testing {

inline bool same_bits(double a, double b) { return std::bit_cast<std::uint64_t>(a) == std::bit_cast<std::uint64_t>(b); }

inline bool same_bits(const Vec2& a, const Vec2& b) { return same_bits(a.x(), b.x()) && same_bits(a.y(), b.y()); }

inline bool identical(const WorldState& a, const WorldState& b) {
  const RobotState& r = a.robot;
  const RobotState& s = b.robot;
  if (!same_bits(r.position, s.position) || !same_bits(r.rotation, s.rotation) || !same_bits(r.opening, s.opening) ||
      !same_bits(r.velocity, s.velocity) || !same_bits(r.angular_velocity, s.angular_velocity) ||
      !same_bits(r.opening_rate, s.opening_rate) || !same_bits(a.time, b.time) ||
      a.objects.size() != b.objects.size()) {
    return false;
  }
  for (std::size_t i = 0; i < a.objects.size(); ++i) {
    const ObjectState& o = a.objects[i];
    const ObjectState& p = b.objects[i];
    if (!same_bits(o.position, p.position) || !same_bits(o.heading, p.heading) || !same_bits(o.velocity, p.velocity) ||
        !same_bits(o.angular_velocity, p.angular_velocity) || o.fallen != p.fallen || !same_bits(o.mass, p.mass)) {
      return false;
    }
  }
  return true;
}

inline TableSpec rect_table(double x0, double y0, double x1, double y1) {
  TableSpec t;
  t.regions.push_back(Rect{{x0, y0}, {x1, y1}});
  return t;
}

inline WorldModel model_with(TableSpec table) {
  WorldModel m;
  m.table = std::move(table);
  return m;
}

/// Robot parked far from the objects, gripper open, facing +y.
inline RobotState parked_robot(Vec2 where = {0.0, -0.5}) {
  RobotState r;
  r.position = where;
  r.rotation = kPi / 2.0;
  r.opening = 0.1;
  return r;
}

inline ObjectState disc_at(Vec2 p, double radius = 0.05, double mass = 0.5, double friction = 0.4) {
  ObjectState o;
  o.shape = Shape::disc(radius);
  o.mass = mass;
  o.friction = friction;
  o.position = p;
  return o;
}

inline ObjectState box_at(Vec2 p, double hx, double hy, double heading = 0.0, double mass = 0.5,
                          double friction = 0.4) {
  ObjectState o;
  o.shape = Shape::box(hx, hy);
  o.mass = mass;
  o.friction = friction;
  o.position = p;
  o.heading = heading;
  return o;
}

/// Random object with the generator's parameter ranges, centered near `p`.
inline ObjectState random_object(RngStream& rng, Vec2 p) {
  ObjectState o = rng.uniform(0.0, 1.0) < 0.5
                      ? disc_at(p, rng.uniform(0.04, 0.07))
                      : box_at(p, rng.uniform(0.05, 0.075), rng.uniform(0.05, 0.075), rng.uniform(-kPi, kPi));
  o.mass = rng.uniform(0.2, 0.8);
  o.friction = rng.uniform(0.2, 0.6);
  return o;
}

/// Robot below `count` random objects kept at least 2 mm apart.
inline WorldState random_scene(RngStream& rng, const WorldModel& model, int count) {
  WorldState s;
  s.robot.position = {rng.uniform(-0.4, 0.4), rng.uniform(-0.45, -0.3)};
  s.robot.rotation = kPi / 2.0 + rng.uniform(-0.4, 0.4);
  s.robot.opening = rng.uniform(0.0, model.robot.max_opening);
  while (static_cast<int>(s.objects.size()) < count) {
    const ObjectState o = random_object(rng, {rng.uniform(-0.3, 0.3), rng.uniform(-0.2, 0.3)});
    bool clear = true;
    for (const ObjectState& p : s.objects) {
      if ((p.position - o.position).norm() < p.shape.bounding_radius() + o.shape.bounding_radius() + 0.002) {
        clear = false;
      }
    }
    if (clear) {
      s.objects.push_back(o);
    }
  }
  return s;
}

}  // namespace tapush::testing
