// Acceptance gate: one PASS/FAIL line per criterion, exit 0 iff all pass.

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "support.hpp"
#include "tapush/bench.hpp"
#include "tapush/planner.hpp"
#include "tapush/scenes.hpp"
#include "tapush/trace.hpp"

namespace {

using namespace tapush;
using testing::identical;
using testing::random_scene;

// Pinned tolerances.
constexpr double kLowSuccessMin = 0.90;
constexpr double kHighGapMin = 0.20;
constexpr double kTimeRatioMax = 0.5;
constexpr double kLowMedianActionsMax = 3.0;
constexpr int kChangingSeeds = 10;
constexpr int kChangingPassesMin = 8;
constexpr double kNoiseStdRelTol = 0.02;
constexpr int kNoiseSamples = 100000;
constexpr double kEnergySlop = 1e-9;          // J
constexpr double kPenetrationMax = 1e-3;      // m
constexpr double kStoppingRelTol = 0.10;
constexpr int kSceneRangeSeeds = 10000;

struct Outcome {
  bool pass = false;
  std::string detail;
};

int failures = 0;

void report(int id, const std::string& name, const Outcome& o) {
  fmt::print("criterion {:>2} {} {}: {}\n", id, o.pass ? "PASS" : "FAIL", name, o.detail);
  std::fflush(stdout);
  failures += o.pass ? 0 : 1;
}

double median(std::vector<double> v) {
  if (v.empty()) {
    return 0.0;
  }
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

using Key = std::tuple<Method, Accuracy, double>;

struct Grid {
  std::map<Key, CellResult> cells;
  const CellResult& at(Method m, Accuracy a, double b) const { return cells.at({m, a, b}); }
};

std::vector<double> action_counts(const CellResult& c) {
  std::vector<double> v;
  for (const EpisodeRecord& e : c.episodes) {
    v.push_back(static_cast<double>(e.result.actions));
  }
  return v;
}

Grid run_grid(std::size_t scenes, int workers, const std::filesystem::path& out) {
  BenchmarkConfig main;
  main.methods = {Method::kTampc, Method::kMpc};
  main.scenes = scenes;
  main.workers = workers;
  main.write_traces = false;
  // Only the low-accuracy UAMPC cells enter a criterion.
  BenchmarkConfig slow = main;
  slow.methods = {Method::kUampc};
  slow.accuracies = {Accuracy::kLow};

  const auto progress = [](std::size_t done, std::size_t total) {
    if (done % 50 == 0 || done == total) {
      fmt::print(stderr, "  {}/{} episodes\n", done, total);
    }
  };
  std::vector<CellResult> all = run_benchmark(main, progress);
  for (CellResult& c : run_benchmark(slow, progress)) {
    all.push_back(std::move(c));
  }
  sort_cells(all);
  if (!out.empty()) {
    std::filesystem::create_directories(out);
    std::ofstream csv(out / "acceptance_grid.csv");
    write_csv(csv, all);
  }
  write_table(std::cout, all);
  Grid g;
  for (CellResult& c : all) {
    g.cells.emplace(Key{c.method, c.accuracy, c.b}, std::move(c));
  }
  return g;
}

Outcome criterion1(const Grid& g) {
  Outcome o{true, ""};
  for (Method m : {Method::kTampc, Method::kUampc}) {
    for (double b : kUncertaintyLevels) {
      const double rate = g.at(m, Accuracy::kLow, b).success_rate;
      o.pass = o.pass && rate >= kLowSuccessMin;
      o.detail += fmt::format("{}@{}={:.2f} ", to_string(m), b, rate);
    }
  }
  o.detail += fmt::format("(need >= {:.2f})", kLowSuccessMin);
  return o;
}

Outcome criterion2(const Grid& g) {
  Outcome o{true, ""};
  for (double b : kUncertaintyLevels) {
    if (b == 0.0) {
      continue;
    }
    const double gap = g.at(Method::kTampc, Accuracy::kHigh, b).success_rate -
                       g.at(Method::kMpc, Accuracy::kHigh, b).success_rate;
    o.pass = o.pass && gap > 0.0 && (b != 0.1 || gap >= kHighGapMin);
    o.detail += fmt::format("gap@{}={:+.2f} ", b, gap);
  }
  o.detail += fmt::format("(need > 0 at every b > 0, >= {:.2f} at b = 0.1)", kHighGapMin);
  return o;
}

Outcome criterion3(const Grid& g) {
  Outcome o{true, ""};
  for (double b : kUncertaintyLevels) {
    const double t = g.at(Method::kTampc, Accuracy::kLow, b).mean_time;
    const double u = g.at(Method::kUampc, Accuracy::kLow, b).mean_time;
    o.pass = o.pass && t < kTimeRatioMax * u;
    o.detail += fmt::format("low@{} tampc/uampc={:.2f}s/{:.2f}s ", b, t, u);
  }
  for (Accuracy a : {Accuracy::kLow, Accuracy::kHigh}) {
    for (double b : kUncertaintyLevels) {
      const double t = g.at(Method::kTampc, a, b).mean_time;
      const double m = g.at(Method::kMpc, a, b).mean_time;
      o.pass = o.pass && t < m;
      o.detail += fmt::format("{}@{} tampc/mpc={:.2f}s/{:.2f}s ", to_string(a), b, t, m);
    }
  }
  return o;
}

Outcome criterion4(const Grid& g) {
  // Adaptivity is only called for when fast actions carry risk, so b = 0 is reported
  // but not gated.
  Outcome o{true, ""};
  for (double b : kUncertaintyLevels) {
    const double low = median(action_counts(g.at(Method::kTampc, Accuracy::kLow, b)));
    const double high = median(action_counts(g.at(Method::kTampc, Accuracy::kHigh, b)));
    if (b > 0.0) {
      o.pass = o.pass && low <= kLowMedianActionsMax && low < high;
    }
    o.detail += fmt::format("b={} median low/high={}/{}{} ", b, low, high, b > 0.0 ? "" : " (not gated)");
  }
  return o;
}

Outcome criterion5() {
  const SceneSpec scene = preset_scene("changing");
  const double strip_start = scene.table.regions.at(1).min.y();
  int passes = 0;
  std::string detail;
  for (int seed = 0; seed < kChangingSeeds; ++seed) {
    const EpisodeResult r = run_tampc(scene, EpisodeConfig{}, static_cast<std::uint64_t>(seed));
    const auto speed = [](const ExecutedAction& a) { return std::hypot(a.control.velocity[0], a.control.velocity[1]); };
    bool ok = r.executed.size() >= 2;
    double first = 0.0;
    double last = 0.0;
    if (ok) {
      first = speed(r.executed.front());
      const std::size_t n = std::min<std::size_t>(5, r.executed.size() - 1);
      std::size_t on_strip = 0;
      for (std::size_t i = r.executed.size() - n; i < r.executed.size(); ++i) {
        last += speed(r.executed[i]) / static_cast<double>(n);
        on_strip += r.executed[i].target_before.y() >= strip_start ? 1 : 0;
      }
      ok = first > last && on_strip > 0;
    }
    passes += ok ? 1 : 0;
    detail += fmt::format("{}:{:.3f}/{:.3f}{} ", seed, first, last, r.success ? "" : "(failed)");
  }
  return {passes >= kChangingPassesMin,
          fmt::format("{}/{} seeds first > mean(last 5) m/s [{}] (need >= {})", passes, kChangingSeeds, detail,
                      kChangingPassesMin)};
}

Outcome criterion6() {
  int monotone_violations = 0;
  int suffix_violations = 0;
  int rollouts = 0;
  const auto check_suffix = [&](const RolloutResult& r) {
    ++rollouts;
    for (std::size_t j = 0; j + 1 < r.values.size(); ++j) {
      suffix_violations += r.values[j] == r.costs[j] + r.values[j + 1] ? 0 : 1;
    }
    suffix_violations += r.values.empty() || r.values.back() == r.costs.back() ? 0 : 1;
  };
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const SceneSpec scene = generate_push_scene(seed % 2 == 0 ? Accuracy::kLow : Accuracy::kHigh, seed);
    const Task task = make_task(scene, EpisodeConfig{});
    const WorldState x0 = scene.initial_state();
    const auto seqs = get_action_sequences(task, x0, 1, 6, 3);
    OptParams p;
    p.K = 4;
    p.i_max = 5;
    p.c_thresh = 0.0;
    p.rule = seed % 2 == 0 ? UpdateRule::kGreedy : UpdateRule::kWeighted;
    for (const OptResult& r : get_opt_action_sequences(task, x0, seqs, p, seed)) {
      for (std::size_t i = 1; i < r.history.size(); ++i) {
        monotone_violations += r.history[i] > r.history[i - 1] ? 1 : 0;
      }
      check_suffix(r.rollout);
      RngStream rng(derive_seed(seed, {r.controls.size()}));
      check_suffix(trajectory_rollout(task, x0, perturb(r.controls, p.sqrt_nu, task.model.limits, rng).controls));
    }
  }
  // Greedy and weighted updates coincide with a single sample.
  int k1_mismatches = 0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const SceneSpec scene = generate_push_scene(Accuracy::kHigh, seed);
    const Task task = make_task(scene, EpisodeConfig{});
    const WorldState x0 = scene.initial_state();
    const ControlSequence init = get_action_sequences(task, x0, 2, 4, 2)[0];
    OptParams p;
    p.K = 1;
    p.i_max = 5;
    p.c_thresh = 0.0;
    const OptResult g = optimize(task, x0, init, p, seed);
    p.rule = UpdateRule::kWeighted;
    const OptResult w = optimize(task, x0, init, p, seed);
    bool same = g.history == w.history && g.controls.size() == w.controls.size();
    for (std::size_t t = 0; same && t < g.controls.size(); ++t) {
      same = g.controls[t].velocity == w.controls[t].velocity;
    }
    k1_mismatches += same ? 0 : 1;
  }
  return {monotone_violations == 0 && suffix_violations == 0 && k1_mismatches == 0,
          fmt::format("{} cost increases over 100 seeds, {} suffix violations in {} rollouts, {} K=1 mismatches",
                      monotone_violations, suffix_violations, rollouts, k1_mismatches)};
}

Outcome criterion7() {
  Outcome o{true, ""};
  const double b = 0.075;
  std::uint64_t seed = 1;
  for (double norm : {0.1, 0.3, 0.9}) {
    NoiseModel noise;
    noise.b = b;
    Control u;
    u.velocity = {norm, 0.0, 0.0, 0.0};
    const double sigma = noise.sigma(u);
    RngStream rng(seed++);
    double sum = 0.0;
    double sum2 = 0.0;
    int n = 0;
    while (n < kNoiseSamples) {
      WorldState s;
      inject_velocity_noise(s, sigma, noise, rng);
      for (double v : {s.robot.velocity.x(), s.robot.velocity.y(), s.robot.angular_velocity, s.robot.opening_rate}) {
        sum += v;
        sum2 += v * v;
        ++n;
      }
    }
    const double mean = sum / n;
    const double sd = std::sqrt(sum2 / n - mean * mean);
    const double rel = std::abs(sd / (b * norm) - 1.0);
    o.pass = o.pass && rel <= kNoiseStdRelTol;
    o.detail += fmt::format("|u|={} std={:.5f} vs {:.5f} ({:.2f}%) ", norm, sd, b * norm, 100.0 * rel);
  }
  WorldModel model = testing::model_with(testing::rect_table(-1.0, -1.0, 1.0, 1.0));
  RngStream rng(99);
  int mismatches = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const WorldState s = random_scene(rng, model, 1 + trial % 3);
    Control u;
    u.velocity = {rng.uniform(-0.5, 0.5), rng.uniform(0.0, 1.0), rng.uniform(-1.0, 1.0), rng.uniform(-0.2, 0.2)};
    u.duration = 0.5;
    RngStream noise_rng(static_cast<std::uint64_t>(trial));
    mismatches += identical(step_stochastic(model, s, u, NoiseModel{}, noise_rng), step_deterministic(model, s, u))
                      ? 0
                      : 1;
  }
  o.pass = o.pass && mismatches == 0;
  o.detail += fmt::format("b=0 bit mismatches {}/200", mismatches);
  return o;
}

Outcome criterion8() {
  const WorldModel model = testing::model_with(testing::rect_table(-1.0, -1.0, 1.0, 1.0));
  RngStream rng(31);
  int energy_violations = 0;
  for (int trial = 0; trial < 200; ++trial) {
    WorldState s = random_scene(rng, model, 2 + trial % 4);
    for (ObjectState& o : s.objects) {
      o.velocity = -o.position.normalized() * rng.uniform(0.2, 1.0);
      o.angular_velocity = rng.uniform(-3.0, 3.0);
    }
    double prev = kinetic_energy(s);
    const FrameSink sink = [&](const WorldState& frame) {
      const double e = kinetic_energy(frame);
      energy_violations += e > prev + kEnergySlop ? 1 : 0;
      prev = e;
    };
    settle(model, s, 2.0, nullptr, &sink);
  }
  double worst = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    WorldState s = random_scene(rng, model, 1 + trial % 4);
    const Vec2 v = (s.objects[0].position - gripper_reference_point(model.robot, s.robot)).normalized() *
                   rng.uniform(0.05, 1.0);
    Control u;
    u.velocity = {v.x(), v.y(), rng.uniform(-1.0, 1.0), rng.uniform(-0.2, 0.2)};
    u.duration = 0.6;
    StepDiagnostics diag;
    const WorldState out = step_deterministic(model, s, u, &diag);
    worst = std::max({worst, diag.max_penetration, max_penetration(model, out)});
  }
  const WorldModel wide = testing::model_with(testing::rect_table(-2.0, -2.0, 2.0, 2.0));
  double worst_stop = 0.0;
  for (double v : {0.2, 0.5, 1.0}) {
    for (double mu : {0.2, 0.4, 0.6}) {
      WorldState s;
      s.robot = testing::parked_robot({0.0, -1.5});
      s.objects = {testing::disc_at({0.0, 0.0}, 0.05, 0.5, mu)};
      s.objects[0].velocity = {v, 0.0};
      const WorldState out = settle(wide, s, 5.0);
      const double expected = v * v / (2.0 * mu * wide.physics.gravity);
      worst_stop = std::max(worst_stop, std::abs(out.objects[0].position.x() / expected - 1.0));
    }
  }
  return {energy_violations == 0 && worst <= kPenetrationMax && worst_stop <= kStoppingRelTol,
          fmt::format("{} energy increases, worst penetration {:.3g} mm, worst stopping error {:.1f}%",
                      energy_violations, 1e3 * worst, 100.0 * worst_stop)};
}

std::string episode_trace(const SceneSpec& scene, const EpisodeConfig& c, std::uint64_t seed) {
  std::ostringstream out;
  TraceWriter writer(out, nlohmann::json::object(), seed);
  run_episode(scene, c, seed, &writer);
  return out.str();
}

Outcome criterion9() {
  int trace_mismatches = 0;
  int invalid = 0;
  int runs = 0;
  for (Method m : {Method::kTampc, Method::kMpc, Method::kUampc}) {
    for (std::uint64_t seed : {1ull, 2ull}) {
      EpisodeConfig c;
      c.planner.method = m;
      c.planner.n_max = m == Method::kUampc ? 6 : 20;
      c.b_override = 0.1;
      const SceneSpec scene = generate_push_scene(Accuracy::kHigh, seed);
      const std::string a = episode_trace(scene, c, seed);
      const std::string b = episode_trace(scene, c, seed);
      trace_mismatches += a == b ? 0 : 1;
      std::istringstream in(a);
      invalid += check_trace(in).ok ? 0 : 1;
      ++runs;
    }
  }
  BenchmarkConfig bench;
  bench.methods = {Method::kTampc, Method::kMpc};
  bench.b_levels = {0.0, 0.1};
  bench.scenes = 3;
  bench.master_seed = 9;
  std::ostringstream x, y;
  write_csv(x, run_benchmark(bench));
  write_csv(y, run_benchmark(bench));
  const bool csv_same = x.str() == y.str();
  return {trace_mismatches == 0 && invalid == 0 && csv_same,
          fmt::format("{}/{} traces differ on rerun, {} invalid, benchmark CSV {}", trace_mismatches, runs, invalid,
                      csv_same ? "identical" : "differs")};
}

Outcome criterion10() {
  const ObjectRanges r;
  const auto in = [](double v, double lo, double hi) { return v >= lo && v <= hi; };
  int bad = 0;
  int boxes = 0;
  for (Accuracy acc : {Accuracy::kLow, Accuracy::kHigh}) {
    for (int seed = 0; seed < kSceneRangeSeeds; ++seed) {
      const SceneSpec s = generate_push_scene(acc, static_cast<std::uint64_t>(seed));
      const ObjectState& o = s.objects.at(0);
      bool ok = in(o.mass, r.mass_min, r.mass_max) && in(o.friction, r.friction_min, r.friction_max) &&
                s.table.contains(o.position) && s.objects.size() == 1;
      if (o.shape.kind == ShapeKind::kBox) {
        ++boxes;
        ok = ok && in(o.shape.half_extents.x(), r.box_half_min, r.box_half_max) &&
             in(o.shape.half_extents.y(), r.box_half_min, r.box_half_max) &&
             in(o.shape.height, r.box_height_min, r.box_height_max);
      } else {
        ok = ok && in(o.shape.radius, r.disc_radius_min, r.disc_radius_max) &&
             in(o.shape.height, r.disc_height_min, r.disc_height_max);
      }
      bad += ok ? 0 : 1;
    }
  }
  return {bad == 0, fmt::format("{} of {} scenes out of range ({} boxes)", bad, 2 * kSceneRangeSeeds, boxes)};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance gate"};
  std::size_t scenes = 50;
  int workers = 1;
  std::string out;
  bool skip_grid = false;
  app.add_option("--scenes", scenes, "Scenes per benchmark cell [default 50]");
  app.add_option("--workers", workers, "Concurrent episodes [default 1]");
  app.add_option("--out", out, "Directory for the grid CSV [default none]");
  app.add_flag("--skip-grid", skip_grid, "Only the property criteria 5-10");
  CLI11_PARSE(app, argc, argv);

  try {
    if (!skip_grid) {
      const Grid grid = run_grid(scenes, workers, out);
      report(1, "low-accuracy success", criterion1(grid));
      report(2, "high-accuracy ordering", criterion2(grid));
      report(3, "time ordering", criterion3(grid));
      report(4, "task adaptivity", criterion4(grid));
    }
    report(5, "changing environment", criterion5());
    report(6, "optimizer properties", criterion6());
    report(7, "noise model", criterion7());
    report(8, "physics", criterion8());
    report(9, "reproducibility", criterion9());
    report(10, "scene ranges", criterion10());
  } catch (const std::exception& e) {
    fmt::print("acceptance aborted: {}\n", e.what());
    return 1;
  }
  fmt::print("{} criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
