#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "tapush/scene.hpp"
#include "tapush/task.hpp"
#include "tapush/trajopt.hpp"

namespace tapush {

enum class Method { kTampc, kMpc, kUampc };
enum class ValueIndexing { kSuffixFromOne, kPaperLiteral };
enum class PlanningClock { kVirtual, kWall };
enum class FailureReason { kNone, kTimeout, kObjectFell };

std::string_view to_string(Method method);
Method parse_method(std::string_view name);
std::string_view to_string(ValueIndexing mode);
ValueIndexing parse_value_indexing(std::string_view name);
std::string_view to_string(PlanningClock clock);
PlanningClock parse_planning_clock(std::string_view name);
std::string_view to_string(FailureReason reason);

struct PlannerParams {
  Method method = Method::kTampc;
  int Q = 8;
  int N = 4;
  int n_min = 1;
  int n_max = 20;
  double timeout = 180.0;  // s, planning plus execution
  ValueIndexing value_indexing = ValueIndexing::kSuffixFromOne;
  double quasi_static_speed = 0.1;  // m/s, MPC initialization
  /// MPC scores its horizon right at the end of each action instead of after the
  /// objects come to rest; only TAMPC/UAMPC wait by default.
  bool mpc_waits_for_rest = false;
  /// Planning time is either measured, or charged per simulated sub-step so episode
  /// outputs do not depend on the machine.
  PlanningClock clock = PlanningClock::kVirtual;
  double seconds_per_substep = 2e-6;
  int workers = 1;

  void validate() const;
};

/// Point the initial candidates head for and the distance the robot has to cover.
struct GoalLine {
  Vec2 start{0.0, 0.0};
  Vec2 direction{0.0, 0.0};  // unit, or zero when already there
  double distance = 0.0;
};

GoalLine goal_line(const Task& task, const WorldState& state);

/// Candidate lengths n_min + ceil((n_max - n_min) * k / (count - 1)), k = 0..count-1.
std::vector<int> candidate_lengths(int n_min, int n_max, int count);

std::vector<ControlSequence> get_action_sequences(const Task& task, const WorldState& state, int n_min, int n_max,
                                                  int count);

std::vector<OptResult> get_opt_action_sequences(const Task& task, const WorldState& state,
                                                const std::vector<ControlSequence>& candidates,
                                                const OptParams& params, std::uint64_t seed);

struct Evaluation {
  std::vector<double> values;  // V^i
  std::size_t chosen = 0;
  std::uint64_t substeps = 0;
};

/// Index minimizing `values`; ties go to the longer sequence, then the lower index.
std::size_t select_candidate(const std::vector<double>& values, const std::vector<std::size_t>& lengths);

Evaluation evaluate_first_actions(const Task& task, const WorldState& state, const std::vector<OptResult>& optimized,
                                  int Q, const NoiseModel& noise, ValueIndexing mode, std::uint64_t seed,
                                  int workers = 1);

/// Quasi-static MPC initialization: constant speed along the goal line until the
/// distance is covered, zero actions for the rest of the horizon.
ControlSequence quasi_static_sequence(const Task& task, const WorldState& state, int horizon, double speed);

struct ExecutedAction {
  Control control;
  Vec2 target_before{0.0, 0.0};
  double time = 0.0;  // episode clock when the action started
};

struct EpisodeResult {
  bool success = false;
  FailureReason reason = FailureReason::kNone;
  std::size_t actions = 0;
  double planning_time = 0.0;   // s
  double execution_time = 0.0;  // s, simulated
  double total_time = 0.0;      // s, clamped to the timeout
  std::vector<ExecutedAction> executed;
  WorldState final_state;
  std::string trace_path;
};

struct Decision {
  std::size_t cycle = 0;
  double time = 0.0;
  std::vector<std::size_t> lengths;
  std::vector<double> initial_costs;
  std::vector<double> optimized_costs;
  std::vector<int> iterations;
  std::vector<std::vector<double>> histories;
  std::vector<double> values;  // empty for MPC
  std::size_t chosen = 0;
  Control executed;
  double planning_time = 0.0;
};

class EpisodeObserver {
 public:
  virtual ~EpisodeObserver() = default;
  virtual void on_start(const SceneSpec& /*scene*/, const WorldState& /*state*/) {}
  virtual void on_frame(const WorldState& /*state*/) {}
  virtual void on_decision(const Decision& /*decision*/) {}
  virtual void on_finish(const EpisodeResult& /*result*/) {}
};

struct EpisodeConfig {
  PlannerParams planner;
  OptParams opt;
  CostParams costs;
  double action_duration = 1.0;  // s
  double t_rest = 2.0;           // s
  PhysicsParams physics;
  RobotGeometry robot;
  SpeedLimits limits;
  NoiseModel noise;  // channel scales; b comes from the scene unless `b_override` is set
  std::optional<double> b_override;

  void validate() const;
};

Task make_task(const SceneSpec& scene, const EpisodeConfig& config);

/// Runs one plan-execute episode with the configured method.
EpisodeResult run_episode(const SceneSpec& scene, const EpisodeConfig& config, std::uint64_t seed,
                          EpisodeObserver* observer = nullptr);

EpisodeResult run_tampc(const SceneSpec& scene, EpisodeConfig config, std::uint64_t seed,
                        EpisodeObserver* observer = nullptr);
EpisodeResult run_mpc(const SceneSpec& scene, EpisodeConfig config, std::uint64_t seed,
                      EpisodeObserver* observer = nullptr);
/// TAMPC with every candidate at the maximum length.
EpisodeResult run_uampc(const SceneSpec& scene, EpisodeConfig config, std::uint64_t seed,
                        EpisodeObserver* observer = nullptr);

}  // namespace tapush
