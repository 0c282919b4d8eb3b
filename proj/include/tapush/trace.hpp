#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "tapush/planner.hpp"

namespace tapush {

/// Writes an episode as JSON lines: a header (scene, configuration, seed), sampled
/// state frames, one record per planning decision and a closing result record.
class TraceWriter : public EpisodeObserver {
 public:
  /// `frame_interval` <= 0 records every sub-step.
  TraceWriter(std::ostream& out, nlohmann::json config, std::uint64_t seed, double frame_interval = 0.02);

  void on_start(const SceneSpec& scene, const WorldState& state) override;
  void on_frame(const WorldState& state) override;
  void on_decision(const Decision& decision) override;
  void on_finish(const EpisodeResult& result) override;

 private:
  void frame(const WorldState& state);
  void write(const nlohmann::json& record);

  std::ostream& out_;
  nlohmann::json config_;
  std::uint64_t seed_;
  double interval_;
  std::int64_t next_tick_ = 0;
};

nlohmann::json frame_json(const WorldState& state);

struct TraceStats {
  std::size_t records = 0;
  std::size_t frames = 0;
  std::size_t decisions = 0;
  bool success = false;
  std::string reason;
  std::size_t actions = 0;
  double total_time = 0.0;
  double sim_time = 0.0;  // last frame time
};

struct TraceCheck {
  bool ok = false;
  std::optional<std::size_t> bad_record;  // 0-based line index of the first offending record
  std::string message;
  TraceStats stats;
  std::vector<nlohmann::json> frames;  // kept only when requested
};

/// Validates a trace: header first, well-formed records, monotone time, physical
/// invariants per frame, increasing decision cycles and exactly one final result.
TraceCheck check_trace(std::istream& in, bool keep_frames = false);

/// Frames resampled at a fixed cadence (zero-order hold), for external viewers.
std::vector<nlohmann::json> resample_frames(const std::vector<nlohmann::json>& frames, double interval);

}  // namespace tapush
