#pragma once

#include <optional>
#include <string_view>

#include "tapush/costs.hpp"
#include "tapush/world.hpp"

namespace tapush {

enum class TaskKind { kPush, kGrasp };

std::string_view to_string(TaskKind kind);
TaskKind parse_task_kind(std::string_view name);

/// Everything a rollout needs besides the state: world model, task goal and costs,
/// action duration and settle time.
struct Task {
  WorldModel model;
  TaskKind kind = TaskKind::kPush;
  std::size_t target = 0;
  CostParams costs;
  double action_duration = 1.0;  // s
  double t_rest = 2.0;           // s

  /// Object excluded from the disturbance term: the pushed object when pushing.
  std::optional<std::size_t> disturbance_excluded() const;
  double running_cost(const WorldState& prev, const WorldState& next, const Control& u) const;
  /// Unweighted terminal cost L_f.
  double terminal_cost(const WorldState& state) const;
  bool complete(const WorldState& state) const;

  void validate() const;
};

}  // namespace tapush
