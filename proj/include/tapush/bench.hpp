#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "json.hpp"

#include "tapush/planner.hpp"
#include "tapush/scenes.hpp"

namespace tapush {

inline const std::vector<double> kUncertaintyLevels{0.0, 0.05, 0.075, 0.1};

struct BenchmarkConfig {
  std::vector<Method> methods{Method::kTampc, Method::kMpc, Method::kUampc};
  std::vector<Accuracy> accuracies{Accuracy::kLow, Accuracy::kHigh};
  std::vector<double> b_levels = kUncertaintyLevels;
  bool allow_custom_b = false;  // otherwise b must come from kUncertaintyLevels
  std::size_t scenes = 50;
  std::uint64_t master_seed = 1;
  double timeout = 180.0;  // s, overrides the planner's
  std::filesystem::path out_dir;  // empty: no files
  bool write_traces = true;
  int workers = 1;  // concurrent episodes
  EpisodeConfig episode;

  void validate() const;
};

nlohmann::json to_json(const BenchmarkConfig& config);
void apply(BenchmarkConfig& config, const nlohmann::json& j);

/// Scene seed for episode `index` of an accuracy level; shared by every method and b.
std::uint64_t scene_seed(std::uint64_t master, Accuracy accuracy, std::size_t index);
/// Planner/execution seed; shared by every method so paired runs see the same noise.
std::uint64_t episode_seed(std::uint64_t master, Accuracy accuracy, double b, std::size_t index);

struct EpisodeRecord {
  std::uint64_t scene_seed = 0;
  EpisodeResult result;
};

struct CellResult {
  Method method = Method::kTampc;
  Accuracy accuracy = Accuracy::kLow;
  double b = 0.0;
  double success_rate = 0.0;
  double mean_time = 0.0;   // s
  double ci95 = 0.0;        // s, half-width of the normal-approximation interval
  double mean_actions = 0.0;
  std::vector<EpisodeRecord> episodes;
};

/// Fills the summary fields of `cell` from its episodes.
void summarize_cell(CellResult& cell);

std::string trace_file_name(Method method, Accuracy accuracy, double b, std::uint64_t scene_seed);

/// Called after each finished episode with (done, total).
using ProgressFn = std::function<void(std::size_t, std::size_t)>;

std::vector<CellResult> run_benchmark(const BenchmarkConfig& config, const ProgressFn& progress = {});

/// Sorts by (method, accuracy, b).
void sort_cells(std::vector<CellResult>& cells);

void write_csv(std::ostream& out, const std::vector<CellResult>& cells);
/// Summary fields only; episode lists come back empty.
std::vector<CellResult> parse_csv(std::istream& in);
void write_table(std::ostream& out, const std::vector<CellResult>& cells);

}  // namespace tapush
