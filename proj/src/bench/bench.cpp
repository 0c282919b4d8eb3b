#include "tapush/bench.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <istream>
#include <mutex>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include <fmt/format.h>

#include "tapush/config.hpp"
#include "tapush/parallel.hpp"
#include "tapush/trace.hpp"

namespace tapush {

using nlohmann::json;

void BenchmarkConfig::validate() const {
  if (methods.empty() || accuracies.empty() || b_levels.empty()) {
    throw std::invalid_argument("benchmark needs at least one method, accuracy and b level");
  }
  if (scenes < 1) {
    throw std::invalid_argument("scenes per cell must be >= 1");
  }
  for (double b : b_levels) {
    if (!(b >= 0.0)) {
      throw std::invalid_argument("b levels must be >= 0");
    }
    if (!allow_custom_b && std::find(kUncertaintyLevels.begin(), kUncertaintyLevels.end(), b) == kUncertaintyLevels.end()) {
      throw std::invalid_argument(fmt::format("b = {} is not one of the preset levels 0, 0.05, 0.075, 0.1 "
                                              "(set allow_custom_b to use it)",
                                              b));
    }
  }
  if (!(timeout > 0.0)) {
    throw std::invalid_argument("timeout must be > 0");
  }
  if (workers < 1) {
    throw std::invalid_argument("worker count must be >= 1");
  }
  episode.validate();
}

json to_json(const BenchmarkConfig& c) {
  json methods = json::array();
  for (Method m : c.methods) {
    methods.push_back(to_string(m));
  }
  json accuracies = json::array();
  for (Accuracy a : c.accuracies) {
    accuracies.push_back(to_string(a));
  }
  json j = to_json(c.episode);
  j["methods"] = methods;
  j["accuracies"] = accuracies;
  j["b_levels"] = c.b_levels;
  j["allow_custom_b"] = c.allow_custom_b;
  j["scenes"] = c.scenes;
  j["seed"] = c.master_seed;
  j["timeout_s"] = c.timeout;
  j["out"] = c.out_dir.string();
  j["write_traces"] = c.write_traces;
  j["workers"] = c.workers;
  j.erase("method");
  return j;
}

void apply(BenchmarkConfig& c, const json& j) {
  if (!j.is_object()) {
    throw std::invalid_argument("benchmark config must be a JSON object");
  }
  json params = json::object();
  for (const auto& item : j.items()) {
    const std::string& k = item.key();
    const json& v = item.value();
    if (k == "methods") {
      c.methods.clear();
      for (const json& m : v) {
        c.methods.push_back(parse_method(m.get<std::string>()));
      }
    } else if (k == "accuracies") {
      c.accuracies.clear();
      for (const json& a : v) {
        c.accuracies.push_back(parse_accuracy(a.get<std::string>()));
      }
    } else if (k == "b_levels") {
      c.b_levels = v.get<std::vector<double>>();
    } else if (k == "allow_custom_b") {
      c.allow_custom_b = v.get<bool>();
    } else if (k == "scenes") {
      c.scenes = v.get<std::size_t>();
    } else if (k == "seed") {
      c.master_seed = v.get<std::uint64_t>();
    } else if (k == "timeout_s") {
      c.timeout = v.get<double>();
    } else if (k == "out") {
      c.out_dir = v.get<std::string>();
    } else if (k == "write_traces") {
      c.write_traces = v.get<bool>();
    } else if (k == "workers") {
      c.workers = v.get<int>();
    } else if (k == "method") {
      throw std::invalid_argument("benchmark configs list methods under 'methods'");
    } else {
      params[k] = v;
    }
  }
  tapush::apply(c.episode, params);
}

std::uint64_t scene_seed(std::uint64_t master, Accuracy accuracy, std::size_t index) {
  return derive_seed(master, {0, static_cast<std::uint64_t>(accuracy), index});
}

std::uint64_t episode_seed(std::uint64_t master, Accuracy accuracy, double b, std::size_t index) {
  return derive_seed(master, {1, static_cast<std::uint64_t>(accuracy), std::bit_cast<std::uint64_t>(b), index});
}

void summarize_cell(CellResult& cell) {
  const auto n = static_cast<double>(cell.episodes.size());
  if (cell.episodes.empty()) {
    cell.success_rate = cell.mean_time = cell.ci95 = cell.mean_actions = 0.0;
    return;
  }
  double successes = 0.0;
  double time_sum = 0.0;
  double action_sum = 0.0;
  for (const EpisodeRecord& e : cell.episodes) {
    successes += e.result.success ? 1.0 : 0.0;
    time_sum += e.result.total_time;
    action_sum += static_cast<double>(e.result.actions);
  }
  cell.success_rate = successes / n;
  cell.mean_time = time_sum / n;
  cell.mean_actions = action_sum / n;
  cell.ci95 = 0.0;
  if (cell.episodes.size() > 1) {
    double ss = 0.0;
    for (const EpisodeRecord& e : cell.episodes) {
      ss += (e.result.total_time - cell.mean_time) * (e.result.total_time - cell.mean_time);
    }
    cell.ci95 = 1.96 * std::sqrt(ss / (n - 1.0)) / std::sqrt(n);
  }
}

std::string trace_file_name(Method method, Accuracy accuracy, double b, std::uint64_t seed) {
  return fmt::format("{}_{}_b{}_{}.jsonl", to_string(method), to_string(accuracy), b, seed);
}

namespace {

struct Job {
  std::size_t cell;
  std::size_t index;
};

}  // namespace

std::vector<CellResult> run_benchmark(const BenchmarkConfig& config, const ProgressFn& progress) {
  config.validate();
  const bool traces = config.write_traces && !config.out_dir.empty();
  std::filesystem::path trace_dir;
  if (!config.out_dir.empty()) {
    std::error_code ec;
    std::filesystem::create_directories(config.out_dir, ec);
    const std::filesystem::path probe = config.out_dir / ".write-test";
    if (std::ofstream(probe).good()) {
      std::filesystem::remove(probe, ec);
    } else {
      throw std::runtime_error("output directory '" + config.out_dir.string() + "' is not writable");
    }
    if (traces) {
      trace_dir = config.out_dir / "traces";
      std::filesystem::create_directories(trace_dir);
    }
  }

  // Scenes are generated once per accuracy level and shared by every cell.
  std::vector<std::vector<std::pair<std::uint64_t, SceneSpec>>> scenes(config.accuracies.size());
  for (std::size_t a = 0; a < config.accuracies.size(); ++a) {
    for (std::size_t i = 0; i < config.scenes; ++i) {
      const std::uint64_t seed = scene_seed(config.master_seed, config.accuracies[a], i);
      scenes[a].emplace_back(seed, generate_push_scene(config.accuracies[a], seed));
    }
  }

  std::vector<CellResult> cells;
  std::vector<std::size_t> cell_accuracy;
  for (Method m : config.methods) {
    for (std::size_t a = 0; a < config.accuracies.size(); ++a) {
      for (double b : config.b_levels) {
        CellResult cell;
        cell.method = m;
        cell.accuracy = config.accuracies[a];
        cell.b = b;
        cell.episodes.resize(config.scenes);
        cells.push_back(std::move(cell));
        cell_accuracy.push_back(a);
      }
    }
  }
  std::vector<Job> jobs;
  for (std::size_t c = 0; c < cells.size(); ++c) {
    for (std::size_t i = 0; i < config.scenes; ++i) {
      jobs.push_back({c, i});
    }
  }

  std::mutex progress_mutex;
  std::size_t done = 0;
  parallel_for(jobs.size(), config.workers, [&](std::size_t j) {
    const Job& job = jobs[j];
    CellResult& cell = cells[job.cell];
    const auto& [seed, scene] = scenes[cell_accuracy[job.cell]][job.index];
    EpisodeConfig episode = config.episode;
    episode.planner.method = cell.method;
    episode.planner.timeout = config.timeout;
    episode.b_override = cell.b;
    const std::uint64_t run_seed = episode_seed(config.master_seed, cell.accuracy, cell.b, job.index);
    EpisodeRecord& record = cell.episodes[job.index];
    record.scene_seed = seed;
    if (traces) {
      const std::filesystem::path path = trace_dir / trace_file_name(cell.method, cell.accuracy, cell.b, seed);
      std::ofstream out(path);
      if (!out) {
        throw std::runtime_error("cannot write trace '" + path.string() + "'");
      }
      TraceWriter writer(out, to_json(episode), run_seed);
      record.result = run_episode(scene, episode, run_seed, &writer);
      record.result.trace_path = path.string();
    } else {
      record.result = run_episode(scene, episode, run_seed);
    }
    if (progress) {
      const std::lock_guard lock(progress_mutex);
      progress(++done, jobs.size());
    }
  });

  for (CellResult& cell : cells) {
    summarize_cell(cell);
  }
  sort_cells(cells);
  return cells;
}

void sort_cells(std::vector<CellResult>& cells) {
  std::stable_sort(cells.begin(), cells.end(), [](const CellResult& x, const CellResult& y) {
    const auto key = [](const CellResult& c) { return std::tuple(to_string(c.method), to_string(c.accuracy), c.b); };
    return key(x) < key(y);
  });
}

namespace {

constexpr const char* kCsvHeader = "method,accuracy,b,success_rate,mean_time_s,ci95_s,mean_actions";

}  // namespace

void write_csv(std::ostream& out, const std::vector<CellResult>& cells) {
  out << kCsvHeader << '\n';
  for (const CellResult& c : cells) {
    out << fmt::format("{},{},{},{},{},{},{}\n", to_string(c.method), to_string(c.accuracy), c.b, c.success_rate,
                       c.mean_time, c.ci95, c.mean_actions);
  }
}

std::vector<CellResult> parse_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != kCsvHeader) {
    throw std::runtime_error("CSV header does not match '" + std::string(kCsvHeader) + "'");
  }
  std::vector<CellResult> cells;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty()) {
      continue;
    }
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string f;
    while (std::getline(ss, f, ',')) {
      fields.push_back(f);
    }
    if (fields.size() != 7) {
      throw std::runtime_error(fmt::format("CSV row {}: expected 7 fields, got {}", row, fields.size()));
    }
    CellResult c;
    try {
      c.method = parse_method(fields[0]);
      c.accuracy = parse_accuracy(fields[1]);
      c.b = std::stod(fields[2]);
      c.success_rate = std::stod(fields[3]);
      c.mean_time = std::stod(fields[4]);
      c.ci95 = std::stod(fields[5]);
      c.mean_actions = std::stod(fields[6]);
    } catch (const std::exception& e) {
      throw std::runtime_error(fmt::format("CSV row {}: {}", row, e.what()));
    }
    cells.push_back(std::move(c));
  }
  return cells;
}

void write_table(std::ostream& out, const std::vector<CellResult>& cells) {
  out << fmt::format("{:<7} {:<9} {:>6} {:>8} {:>10} {:>8} {:>9}\n", "method", "accuracy", "b", "success",
                     "time [s]", "ci95 [s]", "actions");
  for (const CellResult& c : cells) {
    out << fmt::format("{:<7} {:<9} {:>6.3f} {:>8.2f} {:>10.2f} {:>8.2f} {:>9.2f}\n", to_string(c.method),
                       to_string(c.accuracy), c.b, c.success_rate, c.mean_time, c.ci95, c.mean_actions);
  }
}

}  // namespace tapush
