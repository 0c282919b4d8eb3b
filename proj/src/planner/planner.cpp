#include "tapush/planner.hpp"

#include <chrono>
#include <cmath>
#include <stdexcept>
#include <string>

#include "tapush/parallel.hpp"

namespace tapush {

std::string_view to_string(Method method) {
  switch (method) {
    case Method::kTampc:
      return "tampc";
    case Method::kMpc:
      return "mpc";
    case Method::kUampc:
      return "uampc";
  }
  return "?";
}

Method parse_method(std::string_view name) {
  if (name == "tampc") {
    return Method::kTampc;
  }
  if (name == "mpc") {
    return Method::kMpc;
  }
  if (name == "uampc") {
    return Method::kUampc;
  }
  throw std::invalid_argument("unknown method '" + std::string(name) + "' (expected tampc, mpc or uampc)");
}

std::string_view to_string(ValueIndexing mode) {
  return mode == ValueIndexing::kSuffixFromOne ? "suffix-from-1" : "paper-literal";
}

ValueIndexing parse_value_indexing(std::string_view name) {
  if (name == "suffix-from-1") {
    return ValueIndexing::kSuffixFromOne;
  }
  if (name == "paper-literal") {
    return ValueIndexing::kPaperLiteral;
  }
  throw std::invalid_argument("unknown value indexing mode '" + std::string(name) + "'");
}

std::string_view to_string(PlanningClock clock) { return clock == PlanningClock::kVirtual ? "virtual" : "wall"; }

PlanningClock parse_planning_clock(std::string_view name) {
  if (name == "virtual") {
    return PlanningClock::kVirtual;
  }
  if (name == "wall") {
    return PlanningClock::kWall;
  }
  throw std::invalid_argument("unknown planning clock '" + std::string(name) + "'");
}

std::string_view to_string(FailureReason reason) {
  switch (reason) {
    case FailureReason::kNone:
      return "none";
    case FailureReason::kTimeout:
      return "timeout";
    case FailureReason::kObjectFell:
      return "object-fell";
  }
  return "?";
}

void PlannerParams::validate() const {
  if (Q < 1) {
    throw std::invalid_argument("Q must be >= 1");
  }
  if (n_min < 1 || n_max < n_min) {
    throw std::invalid_argument("need 1 <= n_min <= n_max");
  }
  if (method != Method::kMpc && N < 2) {
    throw std::invalid_argument("N must be >= 2: candidate lengths divide by N - 1");
  }
  if (!(timeout > 0.0)) {
    throw std::invalid_argument("timeout must be > 0");
  }
  if (!(quasi_static_speed > 0.0)) {
    throw std::invalid_argument("quasi-static speed must be > 0");
  }
  if (!(seconds_per_substep >= 0.0)) {
    throw std::invalid_argument("seconds per sub-step must be >= 0");
  }
  if (workers < 1) {
    throw std::invalid_argument("worker count must be >= 1");
  }
}

void EpisodeConfig::validate() const {
  planner.validate();
  opt.validate();
  costs.validate();
  if (b_override && !(*b_override >= 0.0)) {
    throw std::invalid_argument("uncertainty slope b must be >= 0");
  }
  if (!(t_rest >= 0.0)) {
    throw std::invalid_argument("t_rest must be >= 0");
  }
}

Task make_task(const SceneSpec& scene, const EpisodeConfig& config) {
  Task task;
  task.model.table = scene.table;
  task.model.robot = config.robot;
  task.model.physics = config.physics;
  task.model.limits = config.limits;
  task.kind = scene.task;
  task.target = scene.target;
  task.costs = config.costs;
  task.action_duration = config.action_duration;
  task.t_rest = config.t_rest;
  task.validate();
  return task;
}

// ---------------------------------------------------------------------------
// Candidate generation

GoalLine goal_line(const Task& task, const WorldState& state) {
  GoalLine line;
  line.start = gripper_reference_point(task.model.robot, state.robot);
  const ObjectState& target = state.objects.at(task.target);
  if (task.kind == TaskKind::kGrasp) {
    const Vec2 d = target.position - line.start;
    line.distance = d.norm();
    if (line.distance > 0.0) {
      line.direction = d / line.distance;
    }
    return line;
  }
  const Vec2 goal = task.model.table.goal->center;
  const Vec2 d = goal - line.start;
  const double len = d.norm();
  if (len <= 0.0) {
    return line;
  }
  line.direction = d / len;
  // The pushing surface is the palm when the object fits between the fingers.
  const RobotGeometry& g = task.model.robot;
  const Vec2 lateral = rotate(gripper_forward(state.robot), kPi / 2.0);
  const double width = 2.0 * target.shape.support_extent(lateral, target.heading);
  const Vec2 pusher = width < state.robot.opening
                          ? state.robot.position + g.palm_half_depth * gripper_forward(state.robot)
                          : line.start;
  const double gap = std::max(
      0.0, (target.position - pusher).dot(line.direction) - target.shape.support_extent(line.direction, target.heading));
  line.distance = (target.position - goal).norm() + gap;
  return line;
}

std::vector<int> candidate_lengths(int n_min, int n_max, int count) {
  if (count < 1) {
    throw std::invalid_argument("need at least one candidate");
  }
  if (n_min < 1 || n_max < n_min) {
    throw std::invalid_argument("need 1 <= n_min <= n_max");
  }
  std::vector<int> lengths;
  lengths.reserve(static_cast<std::size_t>(count));
  if (count == 1) {
    lengths.push_back(n_min);
    return lengths;
  }
  const long long span = n_max - n_min;
  const long long div = count - 1;
  for (long long k = 0; k < count; ++k) {
    lengths.push_back(n_min + static_cast<int>((span * k + div - 1) / div));
  }
  return lengths;
}

namespace {

ControlSequence constant_sequence(const Task& task, const GoalLine& line, int n) {
  const double dt = task.action_duration;
  const double speed = line.distance / (static_cast<double>(n) * dt);
  Control u;
  u.duration = dt;
  u.velocity = {speed * line.direction.x(), speed * line.direction.y(), 0.0, 0.0};
  return ControlSequence(static_cast<std::size_t>(n), task.model.limits.clamp(u));
}

std::vector<ControlSequence> sequences_for(const Task& task, const WorldState& state, const std::vector<int>& lengths) {
  const GoalLine line = goal_line(task, state);
  std::vector<ControlSequence> out;
  out.reserve(lengths.size());
  for (int n : lengths) {
    out.push_back(constant_sequence(task, line, n));
  }
  return out;
}

}  // namespace

std::vector<ControlSequence> get_action_sequences(const Task& task, const WorldState& state, int n_min, int n_max,
                                                  int count) {
  if (count < 2) {
    throw std::invalid_argument("N must be >= 2: candidate lengths divide by N - 1");
  }
  return sequences_for(task, state, candidate_lengths(n_min, n_max, count));
}

std::vector<OptResult> get_opt_action_sequences(const Task& task, const WorldState& state,
                                                const std::vector<ControlSequence>& candidates,
                                                const OptParams& params, std::uint64_t seed) {
  if (candidates.empty()) {
    throw std::invalid_argument("no candidate sequences to optimize");
  }
  std::vector<OptResult> out(candidates.size());
  // Candidates run one after another; each optimization parallelizes its own rollouts.
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    out[i] = optimize(task, state, candidates[i], params, derive_seed(seed, {i}));
  }
  return out;
}

ControlSequence quasi_static_sequence(const Task& task, const WorldState& state, int horizon, double speed) {
  if (horizon < 1) {
    throw std::invalid_argument("MPC horizon must be >= 1");
  }
  const GoalLine line = goal_line(task, state);
  const double dt = task.action_duration;
  Control zero;
  zero.duration = dt;
  ControlSequence out(static_cast<std::size_t>(horizon), zero);
  const double step = speed * dt;
  double remaining = line.distance;
  for (Control& u : out) {
    if (remaining <= 1e-12) {
      break;
    }
    const double d = std::min(step, remaining);
    const double v = d / dt;
    u.velocity = {v * line.direction.x(), v * line.direction.y(), 0.0, 0.0};
    u = task.model.limits.clamp(u);
    remaining -= d;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Evaluation

std::size_t select_candidate(const std::vector<double>& values, const std::vector<std::size_t>& lengths) {
  if (values.empty() || values.size() != lengths.size()) {
    throw std::invalid_argument("need one length per evaluated candidate");
  }
  std::size_t best = 0;
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (values[i] < values[best] || (values[i] == values[best] && lengths[i] > lengths[best])) {
      best = i;
    }
  }
  return best;
}

Evaluation evaluate_first_actions(const Task& task, const WorldState& state, const std::vector<OptResult>& optimized,
                                  int Q, const NoiseModel& noise, ValueIndexing mode, std::uint64_t seed,
                                  int workers) {
  if (Q < 1) {
    throw std::invalid_argument("Q must be >= 1");
  }
  if (optimized.empty()) {
    throw std::invalid_argument("no candidates to evaluate");
  }
  const std::size_t n_cand = optimized.size();
  const auto q_count = static_cast<std::size_t>(Q);
  std::vector<double> sample_costs(n_cand * q_count);
  std::vector<std::uint64_t> sample_steps(n_cand * q_count);
  parallel_for(n_cand * q_count, workers, [&](std::size_t idx) {
    const std::size_t i = idx / q_count;
    const std::size_t q = idx % q_count;
    RngStream rng(derive_seed(seed, {i, q}));
    const Control& u = optimized[i].controls.front();
    StepDiagnostics diag;
    WorldState next = step_stochastic(task.model, state, u, noise, rng, &diag);
    next = settle(task.model, next, task.t_rest, &diag);
    double cost = task.running_cost(state, next, u);
    if (mode == ValueIndexing::kSuffixFromOne && optimized[i].controls.size() == 1) {
      // A single-action plan ends where the sample ends.
      cost += task.costs.w_f * task.terminal_cost(next);
    }
    sample_costs[idx] = cost;
    sample_steps[idx] = diag.substeps;
  });

  Evaluation ev;
  ev.values.resize(n_cand);
  std::vector<std::size_t> lengths(n_cand);
  for (std::size_t i = 0; i < n_cand; ++i) {
    const OptResult& r = optimized[i];
    lengths[i] = r.controls.size();
    double offset;
    if (mode == ValueIndexing::kPaperLiteral) {
      offset = r.rollout.values.front();
    } else if (lengths[i] > 1) {
      offset = r.rollout.values[1];
    } else {
      offset = 0.0;
    }
    double sum = 0.0;
    for (std::size_t q = 0; q < q_count; ++q) {
      sum += sample_costs[i * q_count + q];
      ev.substeps += sample_steps[i * q_count + q];
    }
    ev.values[i] = sum / static_cast<double>(q_count) + offset;
  }
  ev.chosen = select_candidate(ev.values, lengths);
  return ev;
}

// ---------------------------------------------------------------------------
// Episodes

namespace {

bool any_fallen(const WorldState& s) {
  for (const ObjectState& o : s.objects) {
    if (o.fallen) {
      return true;
    }
  }
  return false;
}

ControlSequence tail(const ControlSequence& u) { return ControlSequence(u.begin() + 1, u.end()); }

}  // namespace

EpisodeResult run_episode(const SceneSpec& scene, const EpisodeConfig& config, std::uint64_t seed,
                          EpisodeObserver* observer) {
  config.validate();
  scene.validate();
  const Task task = make_task(scene, config);
  PlannerParams p = config.planner;
  if (p.method == Method::kUampc) {
    p.n_min = p.n_max;
  }
  NoiseModel noise = config.noise;
  noise.b = config.b_override.value_or(scene.b);
  if (!(noise.b >= 0.0)) {
    throw std::invalid_argument("uncertainty slope b must be >= 0");
  }

  Task plan_task = task;
  if (p.method == Method::kMpc && !p.mpc_waits_for_rest) {
    plan_task.t_rest = 0.0;
  }
  const std::uint64_t plan_seed = derive_seed(seed, {1});
  RngStream exec_rng(derive_seed(seed, {2}));
  WorldState state = scene.initial_state();
  if (observer) {
    observer->on_start(scene, state);
  }
  FrameSink sink;
  if (observer) {
    sink = [observer](const WorldState& s) { observer->on_frame(s); };
  }

  EpisodeResult result;
  double elapsed = 0.0;
  std::vector<ControlSequence> candidates;
  ControlSequence warm;
  if (p.method == Method::kMpc) {
    warm = quasi_static_sequence(task, state, p.n_max, p.quasi_static_speed);
  } else {
    candidates = get_action_sequences(task, state, p.n_min, p.n_max, p.N);
  }

  for (std::size_t cycle = 0;; ++cycle) {
    if (any_fallen(state)) {
      result.reason = FailureReason::kObjectFell;
      break;
    }
    if (task.complete(state)) {
      result.success = elapsed <= p.timeout;
      result.reason = result.success ? FailureReason::kNone : FailureReason::kTimeout;
      break;
    }
    if (elapsed >= p.timeout) {
      result.reason = FailureReason::kTimeout;
      break;
    }

    const auto wall_start = std::chrono::steady_clock::now();
    std::uint64_t substeps = 0;
    Decision decision;
    decision.cycle = cycle;
    decision.time = elapsed;
    std::vector<OptResult> optimized;
    if (p.method == Method::kMpc) {
      optimized.push_back(optimize(plan_task, state, warm, config.opt, derive_seed(plan_seed, {cycle, 0})));
      decision.chosen = 0;
    } else {
      optimized = get_opt_action_sequences(task, state, candidates, config.opt, derive_seed(plan_seed, {cycle, 0}));
      const Evaluation ev = evaluate_first_actions(task, state, optimized, p.Q, noise, p.value_indexing,
                                                   derive_seed(plan_seed, {cycle, 1}), p.workers);
      substeps += ev.substeps;
      decision.values = ev.values;
      decision.chosen = ev.chosen;
    }
    for (const OptResult& r : optimized) {
      substeps += r.substeps;
      decision.lengths.push_back(r.controls.size());
      decision.initial_costs.push_back(r.initial_cost);
      decision.optimized_costs.push_back(r.rollout.total());
      decision.iterations.push_back(r.iterations);
      decision.histories.push_back(r.history);
    }
    const double plan_time =
        p.clock == PlanningClock::kWall
            ? std::chrono::duration<double>(std::chrono::steady_clock::now() - wall_start).count()
            : static_cast<double>(substeps) * p.seconds_per_substep;
    decision.planning_time = plan_time;
    elapsed += plan_time;
    result.planning_time += plan_time;
    if (elapsed > p.timeout) {
      result.reason = FailureReason::kTimeout;
      break;
    }

    const ControlSequence& winner = optimized[decision.chosen].controls;
    const Control u = winner.front();
    decision.executed = u;
    if (observer) {
      observer->on_decision(decision);
    }
    result.executed.push_back({u, state.objects.at(task.target).position, elapsed});
    WorldState next = step_stochastic(task.model, state, u, noise, exec_rng, nullptr, sink ? &sink : nullptr);
    next = settle(task.model, next, task.t_rest, nullptr, sink ? &sink : nullptr);
    const double exec_time = next.time - state.time;
    elapsed += exec_time;
    result.execution_time += exec_time;
    state = std::move(next);
    ++result.actions;

    ControlSequence suffix = tail(winner);
    if (p.method == Method::kMpc) {
      Control zero;
      zero.duration = task.action_duration;
      suffix.push_back(zero);
      warm = std::move(suffix);
    } else if (suffix.empty()) {
      candidates = get_action_sequences(task, state, p.n_min, p.n_max, p.N);
    } else {
      candidates = sequences_for(task, state, candidate_lengths(p.n_min, p.n_max, p.N - 1));
      candidates.push_back(std::move(suffix));
    }
  }
  result.total_time = std::min(elapsed, p.timeout);
  result.final_state = state;
  if (observer) {
    observer->on_finish(result);
  }
  return result;
}

EpisodeResult run_tampc(const SceneSpec& scene, EpisodeConfig config, std::uint64_t seed, EpisodeObserver* observer) {
  config.planner.method = Method::kTampc;
  return run_episode(scene, config, seed, observer);
}

EpisodeResult run_mpc(const SceneSpec& scene, EpisodeConfig config, std::uint64_t seed, EpisodeObserver* observer) {
  config.planner.method = Method::kMpc;
  return run_episode(scene, config, seed, observer);
}

EpisodeResult run_uampc(const SceneSpec& scene, EpisodeConfig config, std::uint64_t seed, EpisodeObserver* observer) {
  config.planner.method = Method::kUampc;
  return run_episode(scene, config, seed, observer);
}

}  // namespace tapush
