#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "json.hpp"

#include "tapush/planner.hpp"
#include "tapush/scene.hpp"

namespace tapush {

/// Where an episode's scene comes from. Exactly one source is active.
struct SceneSource {
  enum class Kind { kPreset, kFile, kGenerator };
  Kind kind = Kind::kPreset;
  std::string name = "wide";  // preset name, file path, or generator (push-high | push-low | clutter)
  std::uint64_t seed = 0;     // generator seed
  std::size_t objects = 5;    // clutter generator only
};

SceneSpec resolve_scene(const SceneSource& source);

struct TraceOptions {
  bool enabled = true;
  bool full_rate = false;         // one frame per physics sub-step
  double frame_interval = 0.02;   // s of simulated time between frames otherwise
};

struct RunConfig {
  SceneSource scene;
  EpisodeConfig episode;
  std::uint64_t seed = 0;
  std::filesystem::path out_dir;
  TraceOptions trace;

  void validate() const;
};

/// Output directory used when none is configured: $TAPUSH_OUT_DIR, else "out".
std::filesystem::path default_out_dir();

/// Parameter groups of an episode. `apply` only touches keys present in `j` and
/// rejects unknown keys, so a partial document overrides the matching defaults.
nlohmann::json to_json(const EpisodeConfig& config);
void apply(EpisodeConfig& config, const nlohmann::json& j);

nlohmann::json to_json(const SceneSource& source);
void apply(SceneSource& source, const nlohmann::json& j);

nlohmann::json to_json(const RunConfig& config);
void apply(RunConfig& config, const nlohmann::json& j);

/// Parses a JSON file, reporting the path on failure.
nlohmann::json read_json_file(const std::filesystem::path& path);

}  // namespace tapush
