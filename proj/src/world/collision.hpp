#pragma once

#include <array>

#include "tapush/geometry.hpp"
#include "tapush/world.hpp"

namespace tapush::detail {

struct ContactPoint {
  Vec2 point{0.0, 0.0};  // world, midway between the surfaces
  double separation = 0.0;  // negative when overlapping
};

/// Up to two contact points sharing one normal, which points from shape A to shape B.
struct Manifold {
  Vec2 normal{1.0, 0.0};
  std::array<ContactPoint, 2> points{};
  int count = 0;
};

struct CollisionShape {
  ShapeKind kind = ShapeKind::kDisc;
  double radius = 0.0;
  Vec2 half{0.0, 0.0};

  static CollisionShape from(const Shape& s) { return {s.kind, s.radius, s.half_extents}; }
  static CollisionShape box(const Vec2& half) { return {ShapeKind::kBox, 0.0, half}; }
  double bounding_radius() const { return kind == ShapeKind::kDisc ? radius : half.norm(); }
};

/// Fills `out` with contacts whose separation is at most `margin`. Returns false when
/// the shapes are farther apart than `margin`.
bool collide(const CollisionShape& a, const Frame& fa, const CollisionShape& b, const Frame& fb,
             double margin, Manifold& out);

}  // namespace tapush::detail
