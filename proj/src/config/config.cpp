#include "tapush/config.hpp"

#include <cstdlib>
#include <fstream>
#include <initializer_list>
#include <stdexcept>
#include <string_view>

#include "tapush/scenes.hpp"

namespace tapush {

using nlohmann::json;

namespace {

void check_keys(const json& j, std::initializer_list<std::string_view> known, std::string_view where) {
  if (!j.is_object()) {
    throw std::invalid_argument(std::string(where) + " must be a JSON object");
  }
  for (const auto& item : j.items()) {
    bool ok = false;
    for (std::string_view k : known) {
      ok = ok || item.key() == k;
    }
    if (!ok) {
      throw std::invalid_argument("unknown key '" + item.key() + "' in " + std::string(where));
    }
  }
}

template <typename T>
void take(const json& j, const char* key, T& out) {
  if (const auto it = j.find(key); it != j.end()) {
    out = it->get<T>();
  }
}

template <typename T>
void take_optional(const json& j, const char* key, std::optional<T>& out) {
  if (const auto it = j.find(key); it != j.end()) {
    out = it->is_null() ? std::nullopt : std::optional<T>(it->get<T>());
  }
}

template <typename Parse>
void take_enum(const json& j, const char* key, Parse parse, auto& out) {
  if (const auto it = j.find(key); it != j.end()) {
    out = parse(it->get<std::string>());
  }
}

json optional_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

}  // namespace

// ---------------------------------------------------------------------------
// EpisodeConfig

json to_json(const EpisodeConfig& c) {
  const PlannerParams& p = c.planner;
  const OptParams& o = c.opt;
  const CostParams& w = c.costs;
  const PhysicsParams& ph = c.physics;
  const RobotGeometry& g = c.robot;
  return {
      {"method", to_string(p.method)},
      {"planner",
       {{"Q", p.Q},
        {"N", p.N},
        {"n_min", p.n_min},
        {"n_max", p.n_max},
        {"timeout_s", p.timeout},
        {"value_indexing", to_string(p.value_indexing)},
        {"quasi_static_speed", p.quasi_static_speed},
        {"mpc_waits_for_rest", p.mpc_waits_for_rest},
        {"clock", to_string(p.clock)},
        {"seconds_per_substep", p.seconds_per_substep},
        {"workers", p.workers}}},
      {"opt",
       {{"K", o.K},
        {"sqrt_nu", o.sqrt_nu},
        {"c_thresh", optional_json(o.c_thresh)},
        {"i_max", o.i_max},
        {"lambda", o.lambda},
        {"rule", to_string(o.rule)},
        {"workers", o.workers}}},
      {"costs",
       {{"w_e", w.w_e}, {"k", w.k}, {"w_s", w.w_s}, {"k_act", w.k_act}, {"w_f", w.w_f}, {"w_phi", w.w_phi}}},
      {"dt", c.action_duration},
      {"t_rest", c.t_rest},
      {"b", optional_json(c.b_override)},
      {"noise", {{"linear_scale", c.noise.linear_scale}, {"angular_scale", c.noise.angular_scale}}},
      {"physics",
       {{"substep", ph.substep},
        {"gravity", ph.gravity},
        {"penetration_slop", ph.penetration_slop},
        {"speculative_distance", ph.speculative_distance},
        {"rest_linear_speed", ph.rest_linear_speed},
        {"rest_angular_speed", ph.rest_angular_speed},
        {"velocity_iterations", ph.velocity_iterations},
        {"position_iterations", ph.position_iterations},
        {"obstacle_friction", ph.obstacle_friction}}},
      {"robot",
       {{"palm_half_depth", g.palm_half_depth},
        {"finger_length", g.finger_length},
        {"finger_half_thickness", g.finger_half_thickness},
        {"max_opening", g.max_opening},
        {"friction", g.friction}}},
      {"speed_limits", c.limits.max},
  };
}

void apply(EpisodeConfig& c, const json& j) {
  check_keys(j,
             {"method", "planner", "opt", "costs", "dt", "t_rest", "b", "noise", "physics", "robot", "speed_limits"},
             "episode parameters");
  take_enum(j, "method", parse_method, c.planner.method);
  if (const auto it = j.find("planner"); it != j.end()) {
    const json& p = *it;
    check_keys(p,
               {"Q", "N", "n_min", "n_max", "timeout_s", "value_indexing", "quasi_static_speed", "mpc_waits_for_rest",
                "clock", "seconds_per_substep", "workers"},
               "planner");
    take(p, "Q", c.planner.Q);
    take(p, "N", c.planner.N);
    take(p, "n_min", c.planner.n_min);
    take(p, "n_max", c.planner.n_max);
    take(p, "timeout_s", c.planner.timeout);
    take_enum(p, "value_indexing", parse_value_indexing, c.planner.value_indexing);
    take(p, "quasi_static_speed", c.planner.quasi_static_speed);
    take(p, "mpc_waits_for_rest", c.planner.mpc_waits_for_rest);
    take_enum(p, "clock", parse_planning_clock, c.planner.clock);
    take(p, "seconds_per_substep", c.planner.seconds_per_substep);
    take(p, "workers", c.planner.workers);
  }
  if (const auto it = j.find("opt"); it != j.end()) {
    const json& o = *it;
    check_keys(o, {"K", "sqrt_nu", "c_thresh", "i_max", "lambda", "rule", "workers"}, "opt");
    take(o, "K", c.opt.K);
    take(o, "sqrt_nu", c.opt.sqrt_nu);
    take_optional(o, "c_thresh", c.opt.c_thresh);
    take(o, "i_max", c.opt.i_max);
    take(o, "lambda", c.opt.lambda);
    take_enum(o, "rule", parse_update_rule, c.opt.rule);
    take(o, "workers", c.opt.workers);
  }
  if (const auto it = j.find("costs"); it != j.end()) {
    const json& w = *it;
    check_keys(w, {"w_e", "k", "w_s", "k_act", "w_f", "w_phi"}, "costs");
    take(w, "w_e", c.costs.w_e);
    take(w, "k", c.costs.k);
    take(w, "w_s", c.costs.w_s);
    take(w, "k_act", c.costs.k_act);
    take(w, "w_f", c.costs.w_f);
    take(w, "w_phi", c.costs.w_phi);
  }
  take(j, "dt", c.action_duration);
  take(j, "t_rest", c.t_rest);
  take_optional(j, "b", c.b_override);
  if (const auto it = j.find("noise"); it != j.end()) {
    check_keys(*it, {"linear_scale", "angular_scale"}, "noise");
    take(*it, "linear_scale", c.noise.linear_scale);
    take(*it, "angular_scale", c.noise.angular_scale);
  }
  if (const auto it = j.find("physics"); it != j.end()) {
    const json& ph = *it;
    check_keys(ph,
               {"substep", "gravity", "penetration_slop", "speculative_distance", "rest_linear_speed",
                "rest_angular_speed", "velocity_iterations", "position_iterations", "obstacle_friction"},
               "physics");
    take(ph, "substep", c.physics.substep);
    take(ph, "gravity", c.physics.gravity);
    take(ph, "penetration_slop", c.physics.penetration_slop);
    take(ph, "speculative_distance", c.physics.speculative_distance);
    take(ph, "rest_linear_speed", c.physics.rest_linear_speed);
    take(ph, "rest_angular_speed", c.physics.rest_angular_speed);
    take(ph, "velocity_iterations", c.physics.velocity_iterations);
    take(ph, "position_iterations", c.physics.position_iterations);
    take(ph, "obstacle_friction", c.physics.obstacle_friction);
  }
  if (const auto it = j.find("robot"); it != j.end()) {
    const json& g = *it;
    check_keys(g, {"palm_half_depth", "finger_length", "finger_half_thickness", "max_opening", "friction"}, "robot");
    take(g, "palm_half_depth", c.robot.palm_half_depth);
    take(g, "finger_length", c.robot.finger_length);
    take(g, "finger_half_thickness", c.robot.finger_half_thickness);
    take(g, "max_opening", c.robot.max_opening);
    take(g, "friction", c.robot.friction);
  }
  take(j, "speed_limits", c.limits.max);
}

// ---------------------------------------------------------------------------
// Scene source

namespace {

std::string_view kind_name(SceneSource::Kind k) {
  switch (k) {
    case SceneSource::Kind::kPreset:
      return "preset";
    case SceneSource::Kind::kFile:
      return "file";
    case SceneSource::Kind::kGenerator:
      return "generator";
  }
  return "?";
}

}  // namespace

SceneSpec resolve_scene(const SceneSource& source) {
  switch (source.kind) {
    case SceneSource::Kind::kPreset:
      return preset_scene(source.name);
    case SceneSource::Kind::kFile:
      return load_scene(source.name);
    case SceneSource::Kind::kGenerator:
      if (source.name == "push-high") {
        return generate_push_scene(Accuracy::kHigh, source.seed);
      }
      if (source.name == "push-low") {
        return generate_push_scene(Accuracy::kLow, source.seed);
      }
      if (source.name == "clutter") {
        return generate_clutter_scene(source.objects, source.seed);
      }
      throw std::invalid_argument("unknown scene generator '" + source.name +
                                  "' (expected push-high, push-low or clutter)");
  }
  throw std::logic_error("unhandled scene source");
}

json to_json(const SceneSource& s) {
  json j{{kind_name(s.kind), s.name}};
  if (s.kind == SceneSource::Kind::kGenerator) {
    j["seed"] = s.seed;
    j["objects"] = s.objects;
  }
  return j;
}

void apply(SceneSource& s, const json& j) {
  check_keys(j, {"preset", "file", "generator", "seed", "objects"}, "scene");
  int sources = 0;
  for (SceneSource::Kind k : {SceneSource::Kind::kPreset, SceneSource::Kind::kFile, SceneSource::Kind::kGenerator}) {
    if (const auto it = j.find(kind_name(k)); it != j.end()) {
      s.kind = k;
      s.name = it->get<std::string>();
      ++sources;
    }
  }
  if (sources > 1) {
    throw std::invalid_argument("scene: give exactly one of preset, file or generator");
  }
  take(j, "seed", s.seed);
  take(j, "objects", s.objects);
}

// ---------------------------------------------------------------------------
// RunConfig

std::filesystem::path default_out_dir() {
  if (const char* env = std::getenv("TAPUSH_OUT_DIR"); env != nullptr && *env != '\0') {
    return env;
  }
  return "out";
}

void RunConfig::validate() const {
  episode.validate();
  if (!(trace.frame_interval > 0.0)) {
    throw std::invalid_argument("trace frame interval must be > 0");
  }
}

json to_json(const RunConfig& c) {
  json j = to_json(c.episode);
  j["scene"] = to_json(c.scene);
  j["seed"] = c.seed;
  j["out"] = c.out_dir.string();
  j["trace"] = {{"enabled", c.trace.enabled},
                {"full_rate", c.trace.full_rate},
                {"frame_interval_s", c.trace.frame_interval}};
  return j;
}

void apply(RunConfig& c, const json& j) {
  if (!j.is_object()) {
    throw std::invalid_argument("run config must be a JSON object");
  }
  json params = json::object();
  for (const auto& item : j.items()) {
    const std::string& k = item.key();
    if (k == "scene") {
      tapush::apply(c.scene, item.value());
    } else if (k == "seed") {
      c.seed = item.value().get<std::uint64_t>();
    } else if (k == "out") {
      c.out_dir = item.value().get<std::string>();
    } else if (k == "trace") {
      check_keys(item.value(), {"enabled", "full_rate", "frame_interval_s"}, "trace");
      take(item.value(), "enabled", c.trace.enabled);
      take(item.value(), "full_rate", c.trace.full_rate);
      take(item.value(), "frame_interval_s", c.trace.frame_interval);
    } else {
      params[k] = item.value();
    }
  }
  tapush::apply(c.episode, params);
}

json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot open '" + path.string() + "'");
  }
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw std::runtime_error("'" + path.string() + "': " + e.what());
  }
}

}  // namespace tapush
