#include "tapush/trace.hpp"

#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <stdexcept>

namespace tapush {

using nlohmann::json;

json frame_json(const WorldState& state) {
  const RobotState& r = state.robot;
  json objects = json::array();
  for (const ObjectState& o : state.objects) {
    objects.push_back({o.position.x(), o.position.y(), o.heading, o.fallen ? 1 : 0});
  }
  return {{"type", "frame"},
          {"t", state.time},
          {"robot", {r.position.x(), r.position.y(), r.rotation, r.opening}},
          {"objects", std::move(objects)}};
}

TraceWriter::TraceWriter(std::ostream& out, json config, std::uint64_t seed, double frame_interval)
    : out_(out), config_(std::move(config)), seed_(seed), interval_(frame_interval) {}

void TraceWriter::write(const json& record) { out_ << record.dump() << '\n'; }

void TraceWriter::on_start(const SceneSpec& scene, const WorldState& state) {
  write({{"type", "header"}, {"format", "tapush-trace"}, {"version", 1}, {"seed", seed_},
         {"config", config_}, {"scene", to_json(scene)}});
  write(frame_json(state));
  if (interval_ > 0.0) {
    next_tick_ = static_cast<std::int64_t>(std::floor(state.time / interval_)) + 1;
  }
}

void TraceWriter::on_frame(const WorldState& state) {
  if (interval_ <= 0.0) {
    write(frame_json(state));
    return;
  }
  // Tick times are integer multiples of the interval so long episodes do not drift.
  if (state.time + 1e-9 >= static_cast<double>(next_tick_) * interval_) {
    write(frame_json(state));
    next_tick_ = static_cast<std::int64_t>(std::floor((state.time + 1e-9) / interval_)) + 1;
  }
}

void TraceWriter::on_decision(const Decision& d) {
  write({{"type", "decision"},
         {"cycle", d.cycle},
         {"time", d.time},
         {"chosen", d.chosen},
         {"lengths", d.lengths},
         {"values", d.values},
         {"initial_costs", d.initial_costs},
         {"optimized_costs", d.optimized_costs},
         {"iterations", d.iterations},
         {"histories", d.histories},
         {"control", d.executed.velocity},
         {"planning_time_s", d.planning_time}});
}

void TraceWriter::on_finish(const EpisodeResult& result) {
  write({{"type", "result"},
         {"success", result.success},
         {"reason", to_string(result.reason)},
         {"actions", result.actions},
         {"planning_time_s", result.planning_time},
         {"execution_time_s", result.execution_time},
         {"total_time_s", result.total_time}});
  out_.flush();
}

// ---------------------------------------------------------------------------
// Validation

namespace {

struct TraceError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

double finite_number(const json& j, const char* what) {
  if (!j.is_number()) {
    throw TraceError(std::string(what) + " is not a number");
  }
  const double v = j.get<double>();
  if (!std::isfinite(v)) {
    throw TraceError(std::string(what) + " is not finite");
  }
  return v;
}

const json& field(const json& rec, const char* key) {
  const auto it = rec.find(key);
  if (it == rec.end()) {
    throw TraceError(std::string("missing field '") + key + "'");
  }
  return *it;
}

class Checker {
 public:
  explicit Checker(bool keep) : keep_(keep) {}

  void record(const json& rec, TraceCheck& out) {
    if (!rec.is_object()) {
      throw TraceError("record is not a JSON object");
    }
    const std::string type = field(rec, "type").get<std::string>();
    if (out.stats.records == 0 && type != "header") {
      throw TraceError("first record must be the header");
    }
    if (finished_) {
      throw TraceError("record after the result record");
    }
    if (type == "header") {
      header(rec, out);
    } else if (type == "frame") {
      frame(rec, out);
    } else if (type == "decision") {
      decision(rec, out);
    } else if (type == "result") {
      result(rec, out);
    } else {
      throw TraceError("unknown record type '" + type + "'");
    }
    ++out.stats.records;
  }

  bool finished() const { return finished_; }

 private:
  void header(const json& rec, TraceCheck&) {
    if (seen_header_) {
      throw TraceError("duplicate header");
    }
    seen_header_ = true;
    if (field(rec, "format") != "tapush-trace") {
      throw TraceError("not a tapush trace");
    }
    const json& scene = field(rec, "scene");
    num_objects_ = field(scene, "objects").size();
    const json& config = field(rec, "config");
    if (const auto robot = config.find("robot"); robot != config.end() && robot->contains("max_opening")) {
      max_opening_ = finite_number(robot->at("max_opening"), "max_opening");
    }
    fallen_.assign(num_objects_, false);
  }

  void frame(const json& rec, TraceCheck& out) {
    const double t = finite_number(field(rec, "t"), "frame time");
    if (t < last_time_) {
      throw TraceError("frame time decreases");
    }
    last_time_ = t;
    const json& robot = field(rec, "robot");
    if (!robot.is_array() || robot.size() != 4) {
      throw TraceError("robot must hold [x, y, rotation, opening]");
    }
    for (const json& v : robot) {
      finite_number(v, "robot coordinate");
    }
    const double opening = robot[3].get<double>();
    if (opening < -1e-12 || opening > max_opening_ + 1e-12) {
      throw TraceError("gripper opening outside [0, max_opening]");
    }
    const json& objects = field(rec, "objects");
    if (!objects.is_array() || objects.size() != num_objects_) {
      throw TraceError("object count differs from the scene");
    }
    for (std::size_t i = 0; i < num_objects_; ++i) {
      const json& o = objects[i];
      if (!o.is_array() || o.size() != 4) {
        throw TraceError("object must hold [x, y, heading, fallen]");
      }
      for (std::size_t k = 0; k < 3; ++k) {
        finite_number(o[k], "object coordinate");
      }
      const bool fallen = o[3].get<int>() != 0;
      if (fallen_[i] && !fallen) {
        throw TraceError("fallen object came back");
      }
      fallen_[i] = fallen;
    }
    ++out.stats.frames;
    out.stats.sim_time = t;
    if (keep_) {
      out.frames.push_back(rec);
    }
  }

  void decision(const json& rec, TraceCheck& out) {
    const auto cycle = field(rec, "cycle").get<std::int64_t>();
    if (cycle != next_cycle_) {
      throw TraceError("decision cycle out of sequence");
    }
    ++next_cycle_;
    const auto chosen = field(rec, "chosen").get<std::size_t>();
    if (chosen >= field(rec, "lengths").size()) {
      throw TraceError("chosen candidate out of range");
    }
    for (const json& v : field(rec, "control")) {
      finite_number(v, "control component");
    }
    if (finite_number(field(rec, "planning_time_s"), "planning time") < 0.0) {
      throw TraceError("negative planning time");
    }
    ++out.stats.decisions;
  }

  void result(const json& rec, TraceCheck& out) {
    finished_ = true;
    out.stats.success = field(rec, "success").get<bool>();
    out.stats.reason = field(rec, "reason").get<std::string>();
    out.stats.actions = field(rec, "actions").get<std::size_t>();
    out.stats.total_time = finite_number(field(rec, "total_time_s"), "total time");
    if (out.stats.actions != out.stats.decisions) {
      throw TraceError("action count differs from the number of decisions");
    }
  }

  bool keep_;
  bool seen_header_ = false;
  bool finished_ = false;
  std::size_t num_objects_ = 0;
  double max_opening_ = std::numeric_limits<double>::infinity();
  double last_time_ = -std::numeric_limits<double>::infinity();
  std::int64_t next_cycle_ = 0;
  std::vector<bool> fallen_;
};

}  // namespace

TraceCheck check_trace(std::istream& in, bool keep_frames) {
  TraceCheck out;
  Checker checker(keep_frames);
  std::string line;
  std::size_t index = 0;
  while (std::getline(in, line)) {
    try {
      checker.record(json::parse(line), out);
    } catch (const std::exception& e) {
      out.bad_record = index;
      out.message = e.what();
      return out;
    }
    ++index;
  }
  if (index == 0) {
    out.bad_record = 0;
    out.message = "empty trace";
    return out;
  }
  if (!checker.finished()) {
    out.bad_record = index;
    out.message = "trace truncated: no result record";
    return out;
  }
  out.ok = true;
  return out;
}

std::vector<json> resample_frames(const std::vector<json>& frames, double interval) {
  if (!(interval > 0.0)) {
    throw std::invalid_argument("resampling interval must be > 0");
  }
  std::vector<json> out;
  if (frames.empty()) {
    return out;
  }
  const double t0 = frames.front().at("t").get<double>();
  const double t1 = frames.back().at("t").get<double>();
  std::size_t src = 0;
  for (std::int64_t k = 0;; ++k) {
    const double t = t0 + static_cast<double>(k) * interval;
    if (t > t1 + 1e-9) {
      break;
    }
    while (src + 1 < frames.size() && frames[src + 1].at("t").get<double>() <= t + 1e-9) {
      ++src;
    }
    json f = frames[src];
    f["t"] = t;
    out.push_back(std::move(f));
  }
  return out;
}

}  // namespace tapush
