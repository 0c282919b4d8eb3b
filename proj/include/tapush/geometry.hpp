#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>

#include <Eigen/Core>

namespace tapush {

using Vec2 = Eigen::Vector2d;

inline constexpr double kPi = std::numbers::pi;

inline double cross(const Vec2& a, const Vec2& b) { return a.x() * b.y() - a.y() * b.x(); }

// s x v for a scalar (out-of-plane) angular quantity.
inline Vec2 cross(double s, const Vec2& v) { return {-s * v.y(), s * v.x()}; }

inline Vec2 rotate(const Vec2& v, double angle) {
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  return {c * v.x() - s * v.y(), s * v.x() + c * v.y()};
}

/// Wraps an angle into (-pi, pi].
inline double normalize_angle(double a) {
  if (a > -kPi && a <= kPi) {
    return a;
  }
  a = std::remainder(a, 2.0 * kPi);
  if (a <= -kPi) {
    a += 2.0 * kPi;
  }
  return a;
}

/// Rigid planar transform (rotation then translation), cached trig.
struct Frame {
  Vec2 origin{0.0, 0.0};
  double c = 1.0;
  double s = 0.0;

  Frame() = default;
  Frame(const Vec2& p, double angle) : origin(p), c(std::cos(angle)), s(std::sin(angle)) {}

  Vec2 rotate(const Vec2& v) const { return {c * v.x() - s * v.y(), s * v.x() + c * v.y()}; }
  Vec2 unrotate(const Vec2& v) const { return {c * v.x() + s * v.y(), -s * v.x() + c * v.y()}; }
  Vec2 to_world(const Vec2& local) const { return origin + rotate(local); }
  Vec2 to_local(const Vec2& world) const { return unrotate(world - origin); }
};

/// Axis-aligned rectangle, closed.
struct Rect {
  Vec2 min{0.0, 0.0};
  Vec2 max{0.0, 0.0};

  bool contains(const Vec2& p) const {
    return p.x() >= min.x() && p.x() <= max.x() && p.y() >= min.y() && p.y() <= max.y();
  }
  bool contains_strictly(const Vec2& p) const {
    return p.x() > min.x() && p.x() < max.x() && p.y() > min.y() && p.y() < max.y();
  }
  Vec2 center() const { return 0.5 * (min + max); }
  Vec2 half_extents() const { return 0.5 * (max - min); }
  double distance_to(const Vec2& p) const;
};

inline double Rect::distance_to(const Vec2& p) const {
  const double dx = std::max({min.x() - p.x(), 0.0, p.x() - max.x()});
  const double dy = std::max({min.y() - p.y(), 0.0, p.y() - max.y()});
  return std::hypot(dx, dy);
}

struct Segment {
  Vec2 a;
  Vec2 b;
};

inline double distance_to_segment(const Vec2& p, const Segment& seg) {
  const Vec2 ab = seg.b - seg.a;
  const double len2 = ab.squaredNorm();
  double t = len2 > 0.0 ? (p - seg.a).dot(ab) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  return (seg.a + t * ab - p).norm();
}

}  // namespace tapush
