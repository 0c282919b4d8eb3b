#include "collision.hpp"

#include <cmath>
#include <limits>

namespace tapush::detail {
namespace {

// Box vertices and outward edge normals in the box frame, counter-clockwise.
struct BoxPolygon {
  std::array<Vec2, 4> vertices;
  std::array<Vec2, 4> normals;
};

BoxPolygon world_box(const Vec2& half, const Frame& f) {
  BoxPolygon poly;
  const std::array<Vec2, 4> local{Vec2{-half.x(), -half.y()}, Vec2{half.x(), -half.y()},
                                  Vec2{half.x(), half.y()}, Vec2{-half.x(), half.y()}};
  const std::array<Vec2, 4> local_normals{Vec2{0.0, -1.0}, Vec2{1.0, 0.0}, Vec2{0.0, 1.0},
                                          Vec2{-1.0, 0.0}};
  for (std::size_t i = 0; i < 4; ++i) {
    poly.vertices[i] = f.to_world(local[i]);
    poly.normals[i] = f.rotate(local_normals[i]);
  }
  return poly;
}

// Largest separation of `b` from any edge of `a`; returns the edge index.
double max_edge_separation(const BoxPolygon& a, const BoxPolygon& b, int& edge) {
  double best = -std::numeric_limits<double>::infinity();
  edge = 0;
  for (int i = 0; i < 4; ++i) {
    const Vec2& n = a.normals[i];
    const Vec2& v = a.vertices[i];
    double min_sep = std::numeric_limits<double>::infinity();
    for (const Vec2& w : b.vertices) {
      min_sep = std::min(min_sep, n.dot(w - v));
    }
    if (min_sep > best) {
      best = min_sep;
      edge = i;
    }
  }
  return best;
}

bool collide_discs(double ra, const Frame& fa, double rb, const Frame& fb, double margin, Manifold& out) {
  const Vec2 d = fb.origin - fa.origin;
  const double dist = d.norm();
  const double sep = dist - ra - rb;
  if (sep > margin) {
    return false;
  }
  out.normal = dist > 1e-12 ? Vec2(d / dist) : Vec2(1.0, 0.0);
  const Vec2 pa = fa.origin + ra * out.normal;
  const Vec2 pb = fb.origin - rb * out.normal;
  out.points[0] = {0.5 * (pa + pb), sep};
  out.count = 1;
  return true;
}

// Normal points from the box to the disc.
bool collide_box_disc(const Vec2& half, const Frame& fbox, double r, const Frame& fdisc, double margin,
                      Manifold& out) {
  const Vec2 c = fbox.to_local(fdisc.origin);
  const Vec2 q{std::clamp(c.x(), -half.x(), half.x()), std::clamp(c.y(), -half.y(), half.y())};
  const Vec2 d = c - q;
  const double dist2 = d.squaredNorm();
  Vec2 normal_local;
  Vec2 surface_local;
  double sep;
  if (dist2 > 1e-24) {
    const double dist = std::sqrt(dist2);
    sep = dist - r;
    if (sep > margin) {
      return false;
    }
    normal_local = d / dist;
    surface_local = q;
  } else {
    // Center inside the box: push out through the nearest face.
    const double dx = half.x() - std::abs(c.x());
    const double dy = half.y() - std::abs(c.y());
    if (dx < dy) {
      normal_local = {c.x() >= 0.0 ? 1.0 : -1.0, 0.0};
      surface_local = {normal_local.x() * half.x(), c.y()};
      sep = -dx - r;
    } else {
      normal_local = {0.0, c.y() >= 0.0 ? 1.0 : -1.0};
      surface_local = {c.x(), normal_local.y() * half.y()};
      sep = -dy - r;
    }
  }
  out.normal = fbox.rotate(normal_local);
  const Vec2 pa = fbox.to_world(surface_local);
  const Vec2 pb = fdisc.origin - r * out.normal;
  out.points[0] = {0.5 * (pa + pb), sep};
  out.count = 1;
  return true;
}

bool collide_boxes(const Vec2& half_a, const Frame& fa, const Vec2& half_b, const Frame& fb, double margin,
                   Manifold& out) {
  const BoxPolygon pa = world_box(half_a, fa);
  const BoxPolygon pb = world_box(half_b, fb);

  int edge_a = 0;
  const double sep_a = max_edge_separation(pa, pb, edge_a);
  if (sep_a > margin) {
    return false;
  }
  int edge_b = 0;
  const double sep_b = max_edge_separation(pb, pa, edge_b);
  if (sep_b > margin) {
    return false;
  }

  const BoxPolygon* ref = &pa;
  const BoxPolygon* inc = &pb;
  int ref_edge = edge_a;
  bool flip = false;
  constexpr double kRelTol = 0.98;
  constexpr double kAbsTol = 0.0005;
  if (sep_b > kRelTol * sep_a + kAbsTol) {
    ref = &pb;
    inc = &pa;
    ref_edge = edge_b;
    flip = true;
  }

  const Vec2 n = ref->normals[ref_edge];
  int inc_edge = 0;
  double min_dot = std::numeric_limits<double>::infinity();
  for (int i = 0; i < 4; ++i) {
    const double d = n.dot(inc->normals[i]);
    if (d < min_dot) {
      min_dot = d;
      inc_edge = i;
    }
  }

  std::array<Vec2, 2> clip{inc->vertices[inc_edge], inc->vertices[(inc_edge + 1) % 4]};
  const Vec2 r1 = ref->vertices[ref_edge];
  const Vec2 r2 = ref->vertices[(ref_edge + 1) % 4];
  const Vec2 t = (r2 - r1).normalized();

  // Keep the part of the incident edge with offset in [t.r1, t.r2].
  auto clip_segment = [&](const Vec2& dir, double offset) {
    const double d0 = dir.dot(clip[0]) - offset;
    const double d1 = dir.dot(clip[1]) - offset;
    if (d0 > 0.0 && d1 > 0.0) {
      return false;
    }
    if (d0 > 0.0) {
      clip[0] = clip[0] + (d0 / (d0 - d1)) * (clip[1] - clip[0]);
    } else if (d1 > 0.0) {
      clip[1] = clip[1] + (d1 / (d1 - d0)) * (clip[0] - clip[1]);
    }
    return true;
  };
  if (!clip_segment(-t, -t.dot(r1)) || !clip_segment(t, t.dot(r2))) {
    return false;
  }

  out.count = 0;
  for (const Vec2& v : clip) {
    const double sep = n.dot(v - r1);
    if (sep <= margin) {
      out.points[out.count++] = {v - 0.5 * sep * n, sep};
    }
  }
  out.normal = flip ? Vec2(-n) : n;
  return out.count > 0;
}

}  // namespace

bool collide(const CollisionShape& a, const Frame& fa, const CollisionShape& b, const Frame& fb,
             double margin, Manifold& out) {
  const double reach = a.bounding_radius() + b.bounding_radius() + margin;
  if ((fb.origin - fa.origin).squaredNorm() > reach * reach) {
    return false;
  }
  if (a.kind == ShapeKind::kDisc && b.kind == ShapeKind::kDisc) {
    return collide_discs(a.radius, fa, b.radius, fb, margin, out);
  }
  if (a.kind == ShapeKind::kBox && b.kind == ShapeKind::kDisc) {
    return collide_box_disc(a.half, fa, b.radius, fb, margin, out);
  }
  if (a.kind == ShapeKind::kDisc && b.kind == ShapeKind::kBox) {
    if (!collide_box_disc(b.half, fb, a.radius, fa, margin, out)) {
      return false;
    }
    out.normal = -out.normal;
    return true;
  }
  return collide_boxes(a.half, fa, b.half, fb, margin, out);
}

}  // namespace tapush::detail
