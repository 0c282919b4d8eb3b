// Command-line front end: single episodes, benchmarks, scene generation, trace replay
// and config validation.
//
// Exit codes: 0 success, 1 usage/config/IO error, 2 episode finished without success.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "tapush/bench.hpp"
#include "tapush/config.hpp"
#include "tapush/scenes.hpp"
#include "tapush/trace.hpp"

namespace {

using nlohmann::json;
using namespace tapush;

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitEpisodeFailed = 2;

// Flags that map onto episode parameters. Each one lands in a JSON patch only when
// given, so it overrides the config file, which overrides the defaults.
struct ParamFlags {
  std::optional<std::string> method;
  std::optional<double> b;
  std::optional<double> timeout;
  std::optional<int> Q, N, n_min, n_max, K, i_max, workers;
  std::optional<double> dt, t_rest, lambda;
  std::optional<std::string> rule, clock, value_indexing;
  std::optional<double> w_e, k_edge, w_s, k_act, w_f, w_phi;

  void add_to(CLI::App& app) {
    app.add_option("--method", method, "Planner: tampc, mpc or uampc")->check(CLI::IsMember({"tampc", "mpc", "uampc"}));
    app.add_option("--b", b, "Uncertainty slope b (noise std per unit control norm, per sub-step)");
    app.add_option("--timeout-s", timeout, "Episode budget in seconds (planning + execution) [default 180]");
    app.add_option("--Q", Q, "Stochastic samples per candidate first action [default 8]");
    app.add_option("--N", N, "Candidate sequences per decision, >= 2 unless mpc [default 4]");
    app.add_option("--n-min", n_min, "Fewest actions in a candidate [default 1]");
    app.add_option("--n-max", n_max, "Most actions in a candidate, also the MPC horizon [default 20]");
    app.add_option("--K", K, "Noisy rollouts per optimizer iteration [default 8]");
    app.add_option("--i-max", i_max, "Optimizer iteration cap [default 20]");
    app.add_option("--lambda", lambda, "Temperature of the cost-weighted update [default 1]");
    app.add_option("--rule", rule, "Optimizer update: greedy or weighted [default greedy]")
        ->check(CLI::IsMember({"greedy", "weighted"}));
    app.add_option("--dt", dt, "Action duration in seconds [default 1]");
    app.add_option("--t-rest", t_rest, "Settle time after each action in seconds [default 2]");
    app.add_option("--clock", clock, "Planning-time accounting: virtual (per simulated sub-step) or wall")
        ->check(CLI::IsMember({"virtual", "wall"}));
    app.add_option("--value-indexing", value_indexing,
                   "Candidate value offset: suffix-from-1 or paper-literal [default suffix-from-1]")
        ->check(CLI::IsMember({"suffix-from-1", "paper-literal"}));
    app.add_option("--workers", workers, "Threads for rollouts and sample evaluation [default 1]");
    app.add_option("--w-e", w_e, "Edge cost weight [default 1]");
    app.add_option("--k-edge", k_edge, "Edge cost exponent gain in 1/m [default 10]");
    app.add_option("--w-s", w_s, "Disturbance weight in 1/m^2 [default 100]");
    app.add_option("--k-act", k_act, "Constant cost per action [default 1]");
    app.add_option("--w-f", w_f, "Terminal cost weight [default 1000]");
    app.add_option("--w-phi", w_phi, "Grasp angle weight in m^2/rad^2 [default 0.01]");
  }

  json patch() const {
    json j = json::object();
    auto put = [&](const char* group, const char* key, const auto& v) {
      if (v) {
        if (group) {
          j[group][key] = *v;
        } else {
          j[key] = *v;
        }
      }
    };
    put(nullptr, "method", method);
    put(nullptr, "b", b);
    put("planner", "timeout_s", timeout);
    put("planner", "Q", Q);
    put("planner", "N", N);
    put("planner", "n_min", n_min);
    put("planner", "n_max", n_max);
    put("planner", "clock", clock);
    put("planner", "value_indexing", value_indexing);
    put("planner", "workers", workers);
    put("opt", "K", K);
    put("opt", "i_max", i_max);
    put("opt", "lambda", lambda);
    put("opt", "rule", rule);
    put("opt", "workers", workers);
    put(nullptr, "dt", dt);
    put(nullptr, "t_rest", t_rest);
    put("costs", "w_e", w_e);
    put("costs", "k", k_edge);
    put("costs", "w_s", w_s);
    put("costs", "k_act", k_act);
    put("costs", "w_f", w_f);
    put("costs", "w_phi", w_phi);
    return j;
  }
};

void merge(json& target, const json& patch) {
  for (const auto& item : patch.items()) {
    if (item.value().is_object() && target.contains(item.key()) && target[item.key()].is_object()) {
      merge(target[item.key()], item.value());
    } else {
      target[item.key()] = item.value();
    }
  }
}

std::string episode_stem(const RunConfig& c, const SceneSpec& scene) {
  return fmt::format("{}_{}_seed{}", to_string(c.episode.planner.method), scene.name.empty() ? "scene" : scene.name,
                     c.seed);
}

json result_json(const EpisodeResult& r, const SceneSpec& scene, const RunConfig& c) {
  json actions = json::array();
  for (const ExecutedAction& a : r.executed) {
    actions.push_back({{"time_s", a.time}, {"control", a.control.velocity}, {"duration_s", a.control.duration}});
  }
  json objects = json::array();
  for (const ObjectState& o : r.final_state.objects) {
    objects.push_back({{"position", {o.position.x(), o.position.y()}}, {"heading", o.heading}, {"fallen", o.fallen}});
  }
  return {{"scene", scene.name},
          {"method", to_string(c.episode.planner.method)},
          {"seed", c.seed},
          {"success", r.success},
          {"reason", to_string(r.reason)},
          {"actions", r.actions},
          {"planning_time_s", r.planning_time},
          {"execution_time_s", r.execution_time},
          {"total_time_s", r.total_time},
          {"executed", actions},
          {"final_objects", objects},
          {"trace", r.trace_path}};
}

int cmd_run(const std::optional<std::string>& config_file, const json& scene_patch, const json& param_patch,
            const std::optional<std::uint64_t>& seed, const std::optional<std::string>& out,
            const json& trace_patch, bool print_config) {
  RunConfig config;
  config.out_dir = default_out_dir();
  json doc = json::object();
  if (config_file) {
    doc = read_json_file(*config_file);
  }
  const bool new_source = scene_patch.contains("preset") || scene_patch.contains("file") ||
                          scene_patch.contains("generator");
  if (new_source || !doc.contains("scene")) {
    doc["scene"] = scene_patch;  // a source flag replaces the file's scene source
  } else {
    merge(doc["scene"], scene_patch);
  }
  merge(doc, param_patch);
  if (!trace_patch.empty()) {
    merge(doc, json{{"trace", trace_patch}});
  }
  if (seed) {
    doc["seed"] = *seed;
  }
  if (out) {
    doc["out"] = *out;
  }
  tapush::apply(config, doc);
  config.validate();
  if (print_config) {
    std::cout << to_json(config).dump(2) << '\n';
    return kExitOk;
  }

  const SceneSpec scene = resolve_scene(config.scene);
  std::filesystem::create_directories(config.out_dir);
  const std::string stem = episode_stem(config, scene);
  EpisodeResult result;
  if (config.trace.enabled) {
    const std::filesystem::path trace_path = config.out_dir / (stem + ".jsonl");
    std::ofstream trace(trace_path);
    if (!trace) {
      throw std::runtime_error("cannot write '" + trace_path.string() + "'");
    }
    TraceWriter writer(trace, to_json(config), config.seed, config.trace.full_rate ? 0.0 : config.trace.frame_interval);
    result = run_episode(scene, config.episode, config.seed, &writer);
    result.trace_path = trace_path.string();
  } else {
    result = run_episode(scene, config.episode, config.seed);
  }
  const std::filesystem::path result_path = config.out_dir / (stem + ".result.json");
  std::ofstream(result_path) << result_json(result, scene, config).dump(2) << '\n';
  fmt::print("{} {} seed={} {} reason={} actions={} time={:.2f}s (plan {:.2f}s) -> {}\n", scene.name,
             to_string(config.episode.planner.method), config.seed, result.success ? "success" : "FAILED",
             to_string(result.reason), result.actions, result.total_time, result.planning_time, result_path.string());
  return result.success ? kExitOk : kExitEpisodeFailed;
}

int cmd_bench(const std::string& config_file, const json& param_patch, const std::optional<std::string>& out,
              const std::optional<std::size_t>& scenes, const std::optional<std::uint64_t>& seed,
              const std::optional<int>& workers, bool quiet) {
  BenchmarkConfig config;
  config.out_dir = default_out_dir();
  json doc = read_json_file(config_file);
  merge(doc, param_patch);
  if (out) {
    doc["out"] = *out;
  }
  if (scenes) {
    doc["scenes"] = *scenes;
  }
  if (seed) {
    doc["seed"] = *seed;
  }
  if (workers) {
    doc["workers"] = *workers;
  }
  if (doc.contains("method")) {
    doc["methods"] = json::array({doc["method"]});
    doc.erase("method");
  }
  tapush::apply(config, doc);
  const auto cells = run_benchmark(config, [&](std::size_t done, std::size_t total) {
    if (!quiet) {
      fmt::print(stderr, "\r{}/{} episodes", done, total);
      if (done == total) {
        fmt::print(stderr, "\n");
      }
    }
  });
  const std::filesystem::path csv = config.out_dir / "results.csv";
  std::ofstream file(csv);
  if (!file) {
    throw std::runtime_error("cannot write '" + csv.string() + "'");
  }
  write_csv(file, cells);
  write_table(std::cout, cells);
  fmt::print("wrote {}\n", csv.string());
  return kExitOk;
}

int cmd_gen_scene(const json& scene_patch, const std::optional<std::string>& out) {
  SceneSource source;
  tapush::apply(source, scene_patch);
  const SceneSpec scene = resolve_scene(source);
  if (out) {
    save_scene(scene, *out);
  } else {
    std::cout << to_json(scene).dump(2) << '\n';
  }
  return kExitOk;
}

int cmd_replay(const std::string& path, const std::optional<double>& emit_interval) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot open '" + path + "'");
  }
  const TraceCheck check = check_trace(in, emit_interval.has_value());
  if (!check.ok) {
    fmt::print(stderr, "{}: invalid trace at record {}: {}\n", path, *check.bad_record, check.message);
    return kExitError;
  }
  const TraceStats& s = check.stats;
  if (emit_interval) {
    for (const json& f : resample_frames(check.frames, *emit_interval)) {
      std::cout << f.dump() << '\n';
    }
  }
  fmt::print(emit_interval ? stderr : stdout,
             "{}: ok, {} records, {} frames, {} decisions, {} after {} actions, {:.2f}s total, {:.2f}s simulated\n",
             path, s.records, s.frames, s.decisions, s.success ? "success" : "failure (" + s.reason + ")", s.actions,
             s.total_time, s.sim_time);
  return kExitOk;
}

int cmd_validate(const std::string& path) {
  const json doc = read_json_file(path);
  if (doc.contains("methods") || doc.contains("b_levels") || doc.contains("scenes")) {
    BenchmarkConfig config;
    tapush::apply(config, doc);
    config.validate();
    fmt::print("{}: valid benchmark config ({} methods x {} accuracies x {} b levels x {} scenes)\n", path,
               config.methods.size(), config.accuracies.size(), config.b_levels.size(), config.scenes);
  } else {
    RunConfig config;
    tapush::apply(config, doc);
    config.validate();
    resolve_scene(config.scene).validate();
    fmt::print("{}: valid run config\n", path);
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Task-adaptive pushing planner: run episodes and benchmarks on a planar tabletop simulator"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Help for every subcommand");

  // run
  CLI::App* run = app.add_subcommand("run", "Run one episode, write its result record and trace");
  std::optional<std::string> run_config;
  std::optional<std::string> preset, scene_file, generator;
  std::optional<std::uint64_t> scene_seed, seed;
  std::optional<std::size_t> objects;
  std::optional<std::string> out;
  std::optional<double> frame_interval;
  bool full_rate = false;
  bool no_trace = false;
  bool print_config = false;
  ParamFlags run_params;
  run->add_option("--config", run_config, "JSON run config; flags override it")->check(CLI::ExistingFile);
  auto* preset_opt = run->add_option("--preset", preset, "Scene preset: strip, wide, l-shape, changing, clutter-grasp");
  auto* file_opt = run->add_option("--scenes,--scene", scene_file, "Scene file (JSON)")->check(CLI::ExistingFile);
  auto* gen_opt = run->add_option("--generator", generator, "Random scene: push-high, push-low or clutter");
  preset_opt->excludes(file_opt)->excludes(gen_opt);
  file_opt->excludes(gen_opt);
  run->add_option("--scene-seed", scene_seed, "Generator seed [default 0]");
  run->add_option("--objects", objects, "Objects in a clutter scene [default 5]");
  run->add_option("--seed", seed, "Master seed for planning and execution noise [default 0]");
  run->add_option("--out", out, "Output directory [default $TAPUSH_OUT_DIR or ./out]");
  run->add_option("--frame-interval-s", frame_interval, "Simulated seconds between trace frames [default 0.02]");
  run->add_flag("--trace-full-rate", full_rate, "Record a trace frame every physics sub-step");
  run->add_flag("--no-trace", no_trace, "Skip the trace file");
  run->add_flag("--print-config", print_config, "Print the effective configuration and exit");
  run_params.add_to(*run);

  // bench
  CLI::App* bench = app.add_subcommand("bench", "Run a benchmark grid from a config file, write results.csv");
  std::string bench_config;
  std::optional<std::size_t> bench_scenes;
  std::optional<int> bench_workers;
  std::optional<std::uint64_t> bench_seed;
  std::optional<std::string> bench_out;
  bool quiet = false;
  ParamFlags bench_params;
  bench->add_option("config", bench_config, "Benchmark config (JSON)")->required();
  bench->add_option("--out", bench_out, "Output directory [default $TAPUSH_OUT_DIR or ./out]");
  bench->add_option("--scenes-per-cell", bench_scenes, "Scenes per (method, accuracy, b) cell [default 50]");
  bench->add_option("--seed", bench_seed, "Master seed [default 1]");
  bench->add_option("--episode-workers", bench_workers, "Episodes run concurrently [default 1]");
  bench->add_flag("--quiet", quiet, "No progress output");
  bench_params.add_to(*bench);

  // gen-scene
  CLI::App* gen = app.add_subcommand("gen-scene", "Write a generated or preset scene as JSON");
  std::optional<std::string> gen_preset, gen_generator, gen_out;
  std::optional<std::uint64_t> gen_seed;
  std::optional<std::size_t> gen_objects;
  auto* gp = gen->add_option("--preset", gen_preset, "Scene preset: strip, wide, l-shape, changing, clutter-grasp");
  auto* gg = gen->add_option("--generator", gen_generator, "push-high, push-low or clutter");
  gp->excludes(gg);
  gen->add_option("--seed", gen_seed, "Generator seed [default 0]");
  gen->add_option("--objects", gen_objects, "Objects in a clutter scene [default 5]");
  gen->add_option("-o,--out", gen_out, "Output file [default stdout]");

  // replay
  CLI::App* replay = app.add_subcommand("replay", "Validate a trace and print episode statistics");
  std::string trace_path;
  std::optional<double> emit_interval;
  replay->add_option("trace", trace_path, "Trace file (JSON lines)")->required();
  replay->add_option("--emit-interval-s", emit_interval,
                     "Print frames resampled every this many simulated seconds as JSON lines");

  // validate
  CLI::App* validate = app.add_subcommand("validate", "Check a run or benchmark config file");
  std::string validate_path;
  validate->add_option("config", validate_path, "Config file (JSON)")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitError;
  }

  try {
    if (*run) {
      json scene = json::object();
      if (preset) {
        scene["preset"] = *preset;
      } else if (scene_file) {
        scene["file"] = *scene_file;
      } else if (generator) {
        scene["generator"] = *generator;
      }
      if (scene_seed) {
        scene["seed"] = *scene_seed;
      }
      if (objects) {
        scene["objects"] = *objects;
      }
      json trace = json::object();
      if (frame_interval) {
        trace["frame_interval_s"] = *frame_interval;
      }
      if (full_rate) {
        trace["full_rate"] = true;
      }
      if (no_trace) {
        trace["enabled"] = false;
      }
      return cmd_run(run_config, scene, run_params.patch(), seed, out, trace, print_config);
    }
    if (*bench) {
      return cmd_bench(bench_config, bench_params.patch(), bench_out, bench_scenes, bench_seed, bench_workers, quiet);
    }
    if (*gen) {
      json scene = json::object();
      if (gen_preset) {
        scene["preset"] = *gen_preset;
      } else if (gen_generator) {
        scene["generator"] = *gen_generator;
      } else {
        scene["preset"] = "wide";
      }
      if (gen_seed) {
        scene["seed"] = *gen_seed;
      }
      if (gen_objects) {
        scene["objects"] = *gen_objects;
      }
      return cmd_gen_scene(scene, gen_out);
    }
    if (*replay) {
      return cmd_replay(trace_path, emit_interval);
    }
    if (*validate) {
      return cmd_validate(validate_path);
    }
  } catch (const std::exception& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return kExitError;
  }
  return kExitError;
}
