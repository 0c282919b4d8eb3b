#pragma once

#include <optional>
#include <span>

#include "tapush/world.hpp"

namespace tapush {

struct CostParams {
  double w_e = 1.0;      // edge weight
  double k = 10.0;       // edge exponent gain, 1/m
  double w_s = 100.0;    // disturbance weight, 1/m^2
  double k_act = 1.0;    // per-action constant
  double w_f = 1000.0;   // terminal weight
  double w_phi = 0.01;   // m^2/rad^2

  void validate() const;
};

/// Sum over objects whose next position is outside the safe zone of w_e * exp(k * d_P),
/// d_P being the object's straight-line displacement over the transition.
double edge_cost(const WorldState& prev, const WorldState& next, const CostParams& params, const TableSpec& table);

/// w_s times the summed squared position displacement, skipping `excluded`.
double disturbance_cost(const WorldState& prev, const WorldState& next, const CostParams& params,
                        std::optional<std::size_t> excluded = std::nullopt);

double running_cost(const WorldState& prev, const WorldState& next, const Control& control, const CostParams& params,
                    const TableSpec& table, std::optional<std::size_t> excluded = std::nullopt);

/// (R_o - R_g)^2 outside the goal disc, 0 on it.
double terminal_cost_push(const WorldState& state, const TableSpec& table, std::size_t target);

/// d_T^2 + w_phi * phi_T^2 for the vector from the gripper reference point to the target.
double terminal_cost_grasp(const WorldState& state, const RobotGeometry& geometry, std::size_t target,
                           const CostParams& params);

struct Transition {
  WorldState prev;
  WorldState next;
  Control control;
};

/// Mean running cost over sampled transitions of the same action.
double sample_average_cost(std::span<const Transition> samples, const CostParams& params, const TableSpec& table,
                           std::optional<std::size_t> excluded = std::nullopt);

}  // namespace tapush
