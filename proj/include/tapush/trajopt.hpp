#pragma once

#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "tapush/task.hpp"
#include "tapush/world.hpp"

namespace tapush {

enum class UpdateRule { kGreedy, kWeighted };

std::string_view to_string(UpdateRule rule);
UpdateRule parse_update_rule(std::string_view name);

struct OptParams {
  int K = 8;
  /// Per-joint standard deviation of the control variations (square root of nu).
  JointVector sqrt_nu{0.08, 0.08, 0.3, 0.08};
  /// Stop once the total cost is at or below this; default k_act * n + 0.01.
  std::optional<double> c_thresh;
  int i_max = 20;
  double lambda = 1.0;
  UpdateRule rule = UpdateRule::kGreedy;
  int workers = 1;

  double threshold(const CostParams& costs, std::size_t n) const;
  void validate() const;
};

struct RolloutResult {
  std::vector<WorldState> states;  // n + 1
  std::vector<double> costs;       // n, terminal cost folded into the last entry
  std::vector<double> values;      // suffix sums of costs
  std::uint64_t substeps = 0;

  double total() const { return values.empty() ? 0.0 : values.front(); }
};

/// values[j] = sum of costs[j..n-1].
std::vector<double> suffix_sums(const std::vector<double>& costs);

RolloutResult trajectory_rollout(const Task& task, const WorldState& x0, const ControlSequence& controls);

using Variation = std::vector<JointVector>;

struct Perturbation {
  ControlSequence controls;  // controls + variation
  Variation variation;       // post-clamp
};

Perturbation perturb(const ControlSequence& controls, const JointVector& sqrt_nu, const SpeedLimits& limits,
                     RngStream& rng);

ControlSequence apply_variation(const ControlSequence& controls, const Variation& variation);

/// Index of the cheapest candidate, lowest index on ties.
std::size_t greedy_index(const std::vector<double>& totals);

ControlSequence update_greedy(const ControlSequence& controls, const std::vector<Variation>& variations,
                              const std::vector<double>& totals);

ControlSequence update_weighted(const ControlSequence& controls, const std::vector<Variation>& variations,
                                const std::vector<std::vector<double>>& step_costs, double lambda);

struct OptResult {
  ControlSequence controls;
  RolloutResult rollout;
  double initial_cost = 0.0;
  /// Incumbent total cost after each iteration (first entry: the initial rollout).
  std::vector<double> history;
  int iterations = 0;
  std::uint64_t substeps = 0;  // simulated across every rollout
};

OptResult optimize(const Task& task, const WorldState& x0, const ControlSequence& initial, const OptParams& params,
                   std::uint64_t seed);

}  // namespace tapush
