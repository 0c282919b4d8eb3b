#include "tapush/trajopt.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "tapush/parallel.hpp"

namespace tapush {

std::string_view to_string(UpdateRule rule) { return rule == UpdateRule::kGreedy ? "greedy" : "weighted"; }

UpdateRule parse_update_rule(std::string_view name) {
  if (name == "greedy") {
    return UpdateRule::kGreedy;
  }
  if (name == "weighted") {
    return UpdateRule::kWeighted;
  }
  throw std::invalid_argument("unknown update rule '" + std::string(name) + "'");
}

double OptParams::threshold(const CostParams& costs, std::size_t n) const {
  return c_thresh ? *c_thresh : costs.k_act * static_cast<double>(n) + 0.01;
}

void OptParams::validate() const {
  if (K < 1) {
    throw std::invalid_argument("K must be >= 1");
  }
  if (i_max < 1) {
    throw std::invalid_argument("I_max must be >= 1");
  }
  for (double s : sqrt_nu) {
    if (!(s > 0.0)) {
      throw std::invalid_argument("sampling variance components must be > 0");
    }
  }
  if (!(lambda > 0.0)) {
    throw std::invalid_argument("lambda must be > 0");
  }
  if (workers < 1) {
    throw std::invalid_argument("worker count must be >= 1");
  }
}

std::vector<double> suffix_sums(const std::vector<double>& costs) {
  std::vector<double> values(costs.size());
  double acc = 0.0;
  for (std::size_t j = costs.size(); j-- > 0;) {
    acc += costs[j];
    values[j] = acc;
  }
  return values;
}

RolloutResult trajectory_rollout(const Task& task, const WorldState& x0, const ControlSequence& controls) {
  if (controls.empty()) {
    throw std::invalid_argument("rollout needs at least one control");
  }
  RolloutResult r;
  r.states.reserve(controls.size() + 1);
  r.costs.reserve(controls.size());
  r.states.push_back(x0);
  StepDiagnostics diag;
  for (const Control& u : controls) {
    const WorldState& prev = r.states.back();
    WorldState next = step_deterministic(task.model, prev, u, &diag);
    next = settle(task.model, next, task.t_rest, &diag);
    r.costs.push_back(task.running_cost(prev, next, u));
    r.states.push_back(std::move(next));
  }
  r.costs.back() += task.costs.w_f * task.terminal_cost(r.states.back());
  r.values = suffix_sums(r.costs);
  r.substeps = diag.substeps;
  return r;
}

Perturbation perturb(const ControlSequence& controls, const JointVector& sqrt_nu, const SpeedLimits& limits,
                     RngStream& rng) {
  Perturbation p;
  p.controls = controls;
  p.variation.resize(controls.size());
  for (std::size_t t = 0; t < controls.size(); ++t) {
    for (std::size_t j = 0; j < kNumJoints; ++j) {
      const double base = controls[t].velocity[j];
      const double moved = std::clamp(base + sqrt_nu[j] * rng.normal(), -limits.max[j], limits.max[j]);
      p.variation[t][j] = moved - base;
      p.controls[t].velocity[j] = base + p.variation[t][j];
    }
  }
  return p;
}

ControlSequence apply_variation(const ControlSequence& controls, const Variation& variation) {
  if (variation.size() != controls.size()) {
    throw std::invalid_argument("variation length differs from the control sequence");
  }
  ControlSequence out = controls;
  for (std::size_t t = 0; t < out.size(); ++t) {
    for (std::size_t j = 0; j < kNumJoints; ++j) {
      out[t].velocity[j] += variation[t][j];
    }
  }
  return out;
}

std::size_t greedy_index(const std::vector<double>& totals) {
  if (totals.empty()) {
    throw std::invalid_argument("greedy update needs at least one candidate");
  }
  std::size_t best = 0;
  for (std::size_t k = 1; k < totals.size(); ++k) {
    if (totals[k] < totals[best]) {
      best = k;
    }
  }
  return best;
}

ControlSequence update_greedy(const ControlSequence& controls, const std::vector<Variation>& variations,
                              const std::vector<double>& totals) {
  if (variations.size() != totals.size()) {
    throw std::invalid_argument("one total cost per variation expected");
  }
  return apply_variation(controls, variations[greedy_index(totals)]);
}

ControlSequence update_weighted(const ControlSequence& controls, const std::vector<Variation>& variations,
                                const std::vector<std::vector<double>>& step_costs, double lambda) {
  const std::size_t K = variations.size();
  if (K == 0 || step_costs.size() != K) {
    throw std::invalid_argument("weighted update needs matching variations and costs");
  }
  if (!(lambda > 0.0)) {
    throw std::invalid_argument("lambda must be > 0");
  }
  ControlSequence out = controls;
  std::vector<double> w(K);
  for (std::size_t t = 0; t < controls.size(); ++t) {
    double c_min = step_costs[0].at(t);
    for (std::size_t k = 1; k < K; ++k) {
      c_min = std::min(c_min, step_costs[k].at(t));
    }
    double w_sum = 0.0;
    for (std::size_t k = 0; k < K; ++k) {
      w[k] = std::exp(-(step_costs[k][t] - c_min) / lambda);
      w_sum += w[k];
    }
    for (std::size_t j = 0; j < kNumJoints; ++j) {
      double delta = 0.0;
      for (std::size_t k = 0; k < K; ++k) {
        delta += w[k] * variations[k].at(t)[j];
      }
      out[t].velocity[j] += delta / w_sum;
    }
  }
  return out;
}

OptResult optimize(const Task& task, const WorldState& x0, const ControlSequence& initial, const OptParams& params,
                   std::uint64_t seed) {
  params.validate();
  OptResult res;
  res.controls = initial;
  res.rollout = trajectory_rollout(task, x0, initial);
  res.initial_cost = res.rollout.total();
  res.history.push_back(res.initial_cost);
  res.substeps = res.rollout.substeps;
  const double thresh = params.threshold(task.costs, initial.size());
  const auto K = static_cast<std::size_t>(params.K);

  std::vector<Perturbation> samples(K);
  std::vector<RolloutResult> rollouts(K);
  while (res.iterations < params.i_max && res.rollout.total() > thresh) {
    const auto iter = static_cast<std::uint64_t>(res.iterations);
    parallel_for(K, params.workers, [&](std::size_t k) {
      RngStream rng(derive_seed(seed, {iter, k}));
      samples[k] = perturb(res.controls, params.sqrt_nu, task.model.limits, rng);
      rollouts[k] = trajectory_rollout(task, x0, samples[k].controls);
    });
    std::vector<Variation> variations(K);
    std::vector<double> totals(K);
    for (std::size_t k = 0; k < K; ++k) {
      variations[k] = std::move(samples[k].variation);
      totals[k] = rollouts[k].total();
      res.substeps += rollouts[k].substeps;
    }

    ControlSequence candidate;
    RolloutResult candidate_rollout;
    if (params.rule == UpdateRule::kGreedy) {
      // The winning perturbed sequence was already rolled out on the deterministic model.
      const std::size_t best = greedy_index(totals);
      candidate = apply_variation(res.controls, variations[best]);
      candidate_rollout = std::move(rollouts[best]);
    } else {
      std::vector<std::vector<double>> step_costs(K);
      for (std::size_t k = 0; k < K; ++k) {
        step_costs[k] = rollouts[k].costs;
      }
      candidate = update_weighted(res.controls, variations, step_costs, params.lambda);
      candidate_rollout = trajectory_rollout(task, x0, candidate);
      res.substeps += candidate_rollout.substeps;
    }
    if (candidate_rollout.total() < res.rollout.total()) {
      res.controls = std::move(candidate);
      res.rollout = std::move(candidate_rollout);
    }
    ++res.iterations;
    res.history.push_back(res.rollout.total());
  }
  return res;
}

}  // namespace tapush
