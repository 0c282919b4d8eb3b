#include <cmath>
#include <string>

#include "collision.hpp"
#include "tapush/world.hpp"

namespace tapush {
namespace {

using detail::CollisionShape;
using detail::Manifold;

enum class BodyRole { kRobot, kObject, kObstacle };

struct Body {
  CollisionShape shape;
  Frame frame;
  Vec2 v{0.0, 0.0};
  double w = 0.0;
  double inv_mass = 0.0;
  double inv_inertia = 0.0;
  double friction = 0.0;
  BodyRole role = BodyRole::kObject;
  int object = -1;
};

struct PointConstraint {
  Vec2 ra{0.0, 0.0};
  Vec2 rb{0.0, 0.0};
  double normal_mass = 0.0;
  double tangent_mass = 0.0;
  double approach = 0.0;  // allowed closing speed for speculative contacts
  double lambda_n = 0.0;
  double lambda_t = 0.0;
};

struct Constraint {
  int a = 0;
  int b = 0;
  Vec2 normal{1.0, 0.0};
  double friction = 0.0;
  int count = 0;
  std::array<PointConstraint, 2> points{};
};

constexpr int kRobotParts = 3;

class Stepper {
 public:
  Stepper(const WorldModel& model, WorldState& state) : model_(model), state_(state) {
    const std::size_t n = kRobotParts + state.objects.size() + model.table.obstacles.size();
    bodies_.resize(n);
    for (int i = 0; i < kRobotParts; ++i) {
      bodies_[i].role = BodyRole::kRobot;
      bodies_[i].friction = model.robot.friction;
    }
    for (std::size_t i = 0; i < state.objects.size(); ++i) {
      Body& b = bodies_[kRobotParts + i];
      const ObjectState& o = state.objects[i];
      b.role = BodyRole::kObject;
      b.object = static_cast<int>(i);
      b.shape = CollisionShape::from(o.shape);
      b.inv_mass = 1.0 / o.mass;
      b.inv_inertia = 1.0 / (o.mass * o.shape.inertia_per_mass());
      b.friction = o.friction;
    }
    for (std::size_t i = 0; i < model.table.obstacles.size(); ++i) {
      Body& b = bodies_[kRobotParts + state.objects.size() + i];
      const Rect& r = model.table.obstacles[i];
      b.role = BodyRole::kObstacle;
      b.shape = CollisionShape::box(r.half_extents());
      b.frame = Frame(r.center(), 0.0);
      b.friction = model.physics.obstacle_friction;
    }
    constraints_.reserve(16);
  }

  void substep(const JointVector& command, double sigma, const NoiseModel* noise, RngStream* rng,
               StepDiagnostics* diag) {
    const double dt = model_.physics.substep;
    RobotState& robot = state_.robot;
    robot.velocity = {command[kJointX], command[kJointY]};
    robot.angular_velocity = command[kJointRot];
    robot.opening_rate = command[kJointGrip];
    if (sigma > 0.0) {
      inject_velocity_noise(state_, sigma, *noise, *rng);
    }
    apply_surface_friction(dt);

    sync_bodies();
    build_constraints(dt);
    if (!constraints_.empty()) {
      solve_velocities();
      if (diag) {
        ++diag->contact_substeps;
      }
    }
    for (std::size_t i = 0; i < state_.objects.size(); ++i) {
      ObjectState& o = state_.objects[i];
      if (o.fallen) {
        continue;
      }
      const Body& b = bodies_[kRobotParts + i];
      o.velocity = b.v;
      o.angular_velocity = b.w;
    }

    const RobotState before = state_.robot;
    integrate(dt);
    double residual = project_positions();
    if (residual > model_.physics.penetration_slop) {
      // An object is jammed between robot parts or against a static obstacle; the
      // robot stalls for this sub-step instead of crushing through it.
      state_.robot.position = before.position;
      state_.robot.rotation = before.rotation;
      state_.robot.opening = before.opening;
      residual = project_positions();
    }
    detect_falls();
    state_.time += dt;
    if (diag) {
      ++diag->substeps;
      diag->max_penetration = std::max(diag->max_penetration, residual);
    }
  }

  /// Current worst overlap among all interacting pairs.
  double measure_penetration() {
    sync_bodies();
    double worst = 0.0;
    for_each_pair([&](int a, int b) {
      Manifold m;
      if (detail::collide(bodies_[a].shape, bodies_[a].frame, bodies_[b].shape, bodies_[b].frame, 0.0, m)) {
        for (int k = 0; k < m.count; ++k) {
          worst = std::max(worst, -m.points[k].separation);
        }
      }
    });
    return worst;
  }

 private:
  void apply_surface_friction(double dt) {
    const double g = model_.physics.gravity;
    for (ObjectState& o : state_.objects) {
      if (o.fallen) {
        continue;
      }
      const double speed = o.velocity.norm();
      const double dv = o.friction * g * dt;
      if (speed <= dv) {
        o.velocity.setZero();
      } else {
        o.velocity *= (speed - dv) / speed;
      }
      // Rotational Coulomb deceleration of a uniformly supported disc of equal area.
      const double r_eq = o.shape.kind == ShapeKind::kDisc
                              ? o.shape.radius
                              : std::sqrt(4.0 * o.shape.half_extents.x() * o.shape.half_extents.y() / kPi);
      const double dw = (4.0 / 3.0) * o.friction * g * dt / r_eq;
      const double w = std::abs(o.angular_velocity);
      o.angular_velocity = w <= dw ? 0.0 : std::copysign(w - dw, o.angular_velocity);
    }
  }

  // Refreshes body frames and velocities from the state.
  void sync_bodies() {
    const RobotState& r = state_.robot;
    const RobotGeometry& g = model_.robot;
    const Frame rf(r.position, r.rotation);
    double slide = r.opening_rate;
    if ((r.opening <= 0.0 && slide < 0.0) || (r.opening >= g.max_opening && slide > 0.0)) {
      slide = 0.0;
    }
    const double finger_x = g.palm_half_depth + 0.5 * g.finger_length;
    const double finger_y = 0.5 * r.opening + g.finger_half_thickness;
    const std::array<Vec2, kRobotParts> centers{Vec2{0.0, 0.0}, Vec2{finger_x, finger_y},
                                                Vec2{finger_x, -finger_y}};
    const std::array<Vec2, kRobotParts> halves{Vec2{g.palm_half_depth, g.palm_half_width()},
                                               Vec2{0.5 * g.finger_length, g.finger_half_thickness},
                                               Vec2{0.5 * g.finger_length, g.finger_half_thickness}};
    const std::array<double, kRobotParts> slide_dir{0.0, 0.5, -0.5};
    for (int i = 0; i < kRobotParts; ++i) {
      Body& b = bodies_[i];
      b.shape = CollisionShape::box(halves[i]);
      const Vec2 offset = rf.rotate(centers[i]);
      b.frame = Frame(r.position + offset, r.rotation);
      b.v = r.velocity + cross(r.angular_velocity, offset) + rf.rotate({0.0, slide_dir[i] * slide});
      b.w = r.angular_velocity;
    }
    for (std::size_t i = 0; i < state_.objects.size(); ++i) {
      const ObjectState& o = state_.objects[i];
      Body& b = bodies_[kRobotParts + i];
      b.frame = Frame(o.position, o.heading);
      b.v = o.velocity;
      b.w = o.angular_velocity;
    }
  }

  template <typename Fn>
  void for_each_pair(Fn&& fn) const {
    const int first_obj = kRobotParts;
    const int num_obj = static_cast<int>(state_.objects.size());
    const int first_obs = first_obj + num_obj;
    const int num_obs = static_cast<int>(model_.table.obstacles.size());
    for (int i = 0; i < num_obj; ++i) {
      if (state_.objects[i].fallen) {
        continue;
      }
      const int oi = first_obj + i;
      for (int p = 0; p < kRobotParts; ++p) {
        fn(p, oi);
      }
      for (int j = i + 1; j < num_obj; ++j) {
        if (!state_.objects[j].fallen) {
          fn(oi, first_obj + j);
        }
      }
      for (int s = 0; s < num_obs; ++s) {
        fn(first_obs + s, oi);
      }
    }
  }

  void build_constraints(double dt) {
    constraints_.clear();
    const double margin = model_.physics.speculative_distance;
    for_each_pair([&](int ia, int ib) {
      const Body& a = bodies_[ia];
      const Body& b = bodies_[ib];
      Manifold m;
      if (!detail::collide(a.shape, a.frame, b.shape, b.frame, margin, m)) {
        return;
      }
      Constraint c;
      c.a = ia;
      c.b = ib;
      c.normal = m.normal;
      c.friction = std::sqrt(a.friction * b.friction);
      c.count = m.count;
      const Vec2 t{m.normal.y(), -m.normal.x()};
      for (int k = 0; k < m.count; ++k) {
        PointConstraint& pc = c.points[k];
        pc.ra = m.points[k].point - a.frame.origin;
        pc.rb = m.points[k].point - b.frame.origin;
        const double rna = cross(pc.ra, m.normal);
        const double rnb = cross(pc.rb, m.normal);
        const double kn = a.inv_mass + b.inv_mass + a.inv_inertia * rna * rna + b.inv_inertia * rnb * rnb;
        const double rta = cross(pc.ra, t);
        const double rtb = cross(pc.rb, t);
        const double kt = a.inv_mass + b.inv_mass + a.inv_inertia * rta * rta + b.inv_inertia * rtb * rtb;
        pc.normal_mass = kn > 0.0 ? 1.0 / kn : 0.0;
        pc.tangent_mass = kt > 0.0 ? 1.0 / kt : 0.0;
        pc.approach = std::max(m.points[k].separation, 0.0) / dt;
      }
      constraints_.push_back(c);
    });
  }

  void solve_velocities() {
    for (int it = 0; it < model_.physics.velocity_iterations; ++it) {
      for (Constraint& c : constraints_) {
        Body& a = bodies_[c.a];
        Body& b = bodies_[c.b];
        const Vec2 n = c.normal;
        const Vec2 t{n.y(), -n.x()};
        for (int k = 0; k < c.count; ++k) {
          PointConstraint& pc = c.points[k];
          // Friction
          {
            const Vec2 dv = b.v + cross(b.w, pc.rb) - a.v - cross(a.w, pc.ra);
            const double vt = dv.dot(t);
            double lambda = -pc.tangent_mass * vt;
            const double max_f = c.friction * pc.lambda_n;
            const double old = pc.lambda_t;
            pc.lambda_t = std::clamp(old + lambda, -max_f, max_f);
            lambda = pc.lambda_t - old;
            const Vec2 p = lambda * t;
            a.v -= a.inv_mass * p;
            a.w -= a.inv_inertia * cross(pc.ra, p);
            b.v += b.inv_mass * p;
            b.w += b.inv_inertia * cross(pc.rb, p);
          }
          // Normal, non-penetration
          {
            const Vec2 dv = b.v + cross(b.w, pc.rb) - a.v - cross(a.w, pc.ra);
            const double vn = dv.dot(n);
            double lambda = -pc.normal_mass * (vn + pc.approach);
            const double old = pc.lambda_n;
            pc.lambda_n = std::max(old + lambda, 0.0);
            lambda = pc.lambda_n - old;
            const Vec2 p = lambda * n;
            a.v -= a.inv_mass * p;
            a.w -= a.inv_inertia * cross(pc.ra, p);
            b.v += b.inv_mass * p;
            b.w += b.inv_inertia * cross(pc.rb, p);
          }
        }
      }
    }
  }

  void integrate(double dt) {
    RobotState& r = state_.robot;
    r.position += dt * r.velocity;
    r.rotation = normalize_angle(r.rotation + dt * r.angular_velocity);
    r.opening = std::clamp(r.opening + dt * r.opening_rate, 0.0, model_.robot.max_opening);
    for (ObjectState& o : state_.objects) {
      if (o.fallen) {
        continue;
      }
      o.position += dt * o.velocity;
      o.heading = normalize_angle(o.heading + dt * o.angular_velocity);
    }
  }

  // Non-linear Gauss-Seidel projection; returns the residual worst overlap.
  double project_positions() {
    const double target = 0.5 * model_.physics.penetration_slop;
    sync_bodies();
    for (int it = 0; it <= model_.physics.position_iterations; ++it) {
      const bool correct = it < model_.physics.position_iterations;
      double worst = 0.0;
      for_each_pair([&](int ia, int ib) {
        Body& a = bodies_[ia];
        Body& b = bodies_[ib];
        Manifold m;
        if (!detail::collide(a.shape, a.frame, b.shape, b.frame, 0.0, m)) {
          return;
        }
        for (int k = 0; k < m.count; ++k) {
          worst = std::max(worst, -m.points[k].separation);
        }
        if (!correct) {
          return;
        }
        for (int k = 0; k < m.count; ++k) {
          const double sep = m.points[k].separation;
          if (sep >= -target) {
            continue;
          }
          const Vec2 ra = m.points[k].point - a.frame.origin;
          const Vec2 rb = m.points[k].point - b.frame.origin;
          const double rna = cross(ra, m.normal);
          const double rnb = cross(rb, m.normal);
          const double kn = a.inv_mass + b.inv_mass + a.inv_inertia * rna * rna + b.inv_inertia * rnb * rnb;
          if (kn <= 0.0) {
            continue;
          }
          const Vec2 p = (-(sep + target) / kn) * m.normal;
          move_body(ia, -a.inv_mass * p, -a.inv_inertia * cross(ra, p));
          move_body(ib, b.inv_mass * p, b.inv_inertia * cross(rb, p));
        }
      });
      if (worst <= target || !correct) {
        return worst;
      }
    }
    return 0.0;
  }

  void move_body(int index, const Vec2& dp, double dangle) {
    Body& b = bodies_[index];
    if (b.role != BodyRole::kObject) {
      return;
    }
    ObjectState& o = state_.objects[b.object];
    o.position += dp;
    o.heading = normalize_angle(o.heading + dangle);
    b.frame = Frame(o.position, o.heading);
  }

  void detect_falls() {
    for (ObjectState& o : state_.objects) {
      if (!o.fallen && off_table(o, model_.table)) {
        o.fallen = true;
        o.velocity.setZero();
        o.angular_velocity = 0.0;
      }
    }
  }

  const WorldModel& model_;
  WorldState& state_;
  std::vector<Body> bodies_;
  std::vector<Constraint> constraints_;
};

std::int64_t substep_count(const WorldModel& model, double duration) {
  if (!std::isfinite(duration) || !(duration > 0.0)) {
    throw std::invalid_argument("control duration must be positive and finite");
  }
  const double dt = model.physics.substep;
  const double exact = duration / dt;
  const auto n = static_cast<std::int64_t>(std::llround(exact));
  if (n < 1 || std::abs(static_cast<double>(n) * dt - duration) > 1e-9 * std::max(1.0, duration)) {
    throw std::invalid_argument("control duration must be an integer multiple of the physics sub-step");
  }
  return n;
}

void check_control(const Control& control) {
  for (double v : control.velocity) {
    if (!std::isfinite(v)) {
      throw PhysicsError("non-finite control component");
    }
  }
}

WorldState advance(const WorldModel& model, const WorldState& state, const Control& control,
                   const NoiseModel* noise, RngStream* rng, StepDiagnostics* diag, const FrameSink* sink) {
  check_control(control);
  const std::int64_t n = substep_count(model, control.duration);
  validate_state(model, state);
  const Control u = model.limits.clamp(control);
  const double sigma = noise ? noise->sigma(u) : 0.0;
  WorldState next = state;
  Stepper stepper(model, next);
  for (std::int64_t k = 0; k < n; ++k) {
    stepper.substep(u.velocity, sigma, noise, rng, diag);
    if (sink && *sink) {
      (*sink)(next);
    }
  }
  return next;
}

}  // namespace

void inject_velocity_noise(WorldState& state, double sigma, const NoiseModel& noise, RngStream& rng) {
  const double lin = sigma * noise.linear_scale;
  const double ang = sigma * noise.angular_scale;
  RobotState& r = state.robot;
  r.velocity.x() += lin * rng.normal();
  r.velocity.y() += lin * rng.normal();
  r.angular_velocity += ang * rng.normal();
  r.opening_rate += lin * rng.normal();
  for (ObjectState& o : state.objects) {
    if (o.fallen) {
      continue;
    }
    o.velocity.x() += lin * rng.normal();
    o.velocity.y() += lin * rng.normal();
    o.angular_velocity += ang * rng.normal();
  }
}

WorldState step_deterministic(const WorldModel& model, const WorldState& state, const Control& control,
                              StepDiagnostics* diag, const FrameSink* sink) {
  return advance(model, state, control, nullptr, nullptr, diag, sink);
}

WorldState step_stochastic(const WorldModel& model, const WorldState& state, const Control& control,
                           const NoiseModel& noise, RngStream& rng, StepDiagnostics* diag, const FrameSink* sink) {
  if (!(noise.b >= 0.0)) {
    throw std::invalid_argument("noise slope b must be >= 0");
  }
  if (noise.b == 0.0) {
    return advance(model, state, control, nullptr, nullptr, diag, sink);
  }
  return advance(model, state, control, &noise, &rng, diag, sink);
}

WorldState settle(const WorldModel& model, const WorldState& state, double t_rest, StepDiagnostics* diag,
                  const FrameSink* sink) {
  if (!std::isfinite(t_rest) || t_rest < 0.0) {
    throw std::invalid_argument("t_rest must be >= 0");
  }
  validate_state(model, state);
  WorldState next = state;
  if (t_rest == 0.0 || at_rest(model, next)) {
    return next;
  }
  const double dt = model.physics.substep;
  const auto max_steps = static_cast<std::int64_t>(std::floor(t_rest / dt + 1e-9));
  Stepper stepper(model, next);
  const JointVector zero{0.0, 0.0, 0.0, 0.0};
  for (std::int64_t k = 0; k < max_steps; ++k) {
    stepper.substep(zero, 0.0, nullptr, nullptr, diag);
    if (sink && *sink) {
      (*sink)(next);
    }
    if (at_rest(model, next)) {
      break;
    }
  }
  return next;
}

double max_penetration(const WorldModel& model, const WorldState& state) {
  WorldState copy = state;
  Stepper stepper(model, copy);
  return stepper.measure_penetration();
}

}  // namespace tapush
