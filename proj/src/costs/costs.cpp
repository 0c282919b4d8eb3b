#include "tapush/costs.hpp"

#include <cmath>
#include <stdexcept>

#include "tapush/task.hpp"

namespace tapush {

void CostParams::validate() const {
  if (!(w_e >= 0.0 && w_s >= 0.0 && k_act >= 0.0 && w_f >= 0.0 && w_phi >= 0.0)) {
    throw std::invalid_argument("cost weights must be >= 0");
  }
  if (!(k > 0.0)) {
    throw std::invalid_argument("edge exponent gain k must be > 0");
  }
}

double edge_cost(const WorldState& prev, const WorldState& next, const CostParams& params, const TableSpec& table) {
  double cost = 0.0;
  for (std::size_t i = 0; i < next.objects.size(); ++i) {
    const ObjectState& o = next.objects[i];
    if (!o.fallen && table.in_safe_zone(o.position)) {
      continue;
    }
    const double d_p = (o.position - prev.objects[i].position).norm();
    cost += params.w_e * std::exp(params.k * d_p);
  }
  return cost;
}

double disturbance_cost(const WorldState& prev, const WorldState& next, const CostParams& params,
                        std::optional<std::size_t> excluded) {
  double sum = 0.0;
  for (std::size_t i = 0; i < next.objects.size(); ++i) {
    if (excluded && *excluded == i) {
      continue;
    }
    sum += (next.objects[i].position - prev.objects[i].position).squaredNorm();
  }
  return params.w_s * sum;
}

double running_cost(const WorldState& prev, const WorldState& next, const Control& /*control*/,
                    const CostParams& params, const TableSpec& table, std::optional<std::size_t> excluded) {
  return edge_cost(prev, next, params, table) + disturbance_cost(prev, next, params, excluded) + params.k_act;
}

double terminal_cost_push(const WorldState& state, const TableSpec& table, std::size_t target) {
  if (!table.goal) {
    throw std::logic_error("push terminal cost needs a goal region");
  }
  const double r_o = (state.objects.at(target).position - table.goal->center).norm();
  const double excess = r_o - table.goal->radius;
  return excess > 0.0 ? excess * excess : 0.0;
}

double terminal_cost_grasp(const WorldState& state, const RobotGeometry& geometry, std::size_t target,
                           const CostParams& params) {
  const Vec2 ref = gripper_reference_point(geometry, state.robot);
  const Vec2 to_target = state.objects.at(target).position - ref;
  const double d_t = to_target.norm();
  double phi = 0.0;
  if (d_t > 0.0) {
    const Vec2 fwd = gripper_forward(state.robot);
    phi = std::atan2(std::abs(cross(fwd, to_target)), fwd.dot(to_target));
  }
  return d_t * d_t + params.w_phi * phi * phi;
}

double sample_average_cost(std::span<const Transition> samples, const CostParams& params, const TableSpec& table,
                           std::optional<std::size_t> excluded) {
  if (samples.empty()) {
    throw std::invalid_argument("sample-average cost needs at least one sample");
  }
  double sum = 0.0;
  for (const Transition& t : samples) {
    sum += running_cost(t.prev, t.next, t.control, params, table, excluded);
  }
  return sum / static_cast<double>(samples.size());
}

// ---------------------------------------------------------------------------
// Task

std::string_view to_string(TaskKind kind) { return kind == TaskKind::kPush ? "push" : "grasp"; }

TaskKind parse_task_kind(std::string_view name) {
  if (name == "push") {
    return TaskKind::kPush;
  }
  if (name == "grasp") {
    return TaskKind::kGrasp;
  }
  throw std::invalid_argument("unknown task kind '" + std::string(name) + "'");
}

std::optional<std::size_t> Task::disturbance_excluded() const {
  if (kind == TaskKind::kPush) {
    return target;
  }
  return std::nullopt;
}

double Task::running_cost(const WorldState& prev, const WorldState& next, const Control& u) const {
  return tapush::running_cost(prev, next, u, costs, model.table, disturbance_excluded());
}

double Task::terminal_cost(const WorldState& state) const {
  if (kind == TaskKind::kPush) {
    return terminal_cost_push(state, model.table, target);
  }
  return terminal_cost_grasp(state, model.robot, target, costs);
}

bool Task::complete(const WorldState& state) const {
  if (kind == TaskKind::kPush) {
    return in_goal(state.objects.at(target), model.table);
  }
  return grasped(model, state, target);
}

void Task::validate() const {
  model.table.validate();
  costs.validate();
  if (kind == TaskKind::kPush && !model.table.goal) {
    throw std::invalid_argument("push task needs a goal region");
  }
  if (!(action_duration > 0.0)) {
    throw std::invalid_argument("action duration must be > 0");
  }
  const double ratio = action_duration / model.physics.substep;
  if (std::abs(ratio - std::round(ratio)) > 1e-9 * std::max(1.0, ratio)) {
    throw std::invalid_argument("action duration must be an integer multiple of the physics sub-step");
  }
  if (!(t_rest >= 0.0)) {
    throw std::invalid_argument("t_rest must be >= 0");
  }
}

}  // namespace tapush
