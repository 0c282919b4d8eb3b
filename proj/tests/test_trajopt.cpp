#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "support.hpp"
#include "tapush/planner.hpp"
#include "tapush/scenes.hpp"
#include "tapush/trajopt.hpp"

namespace tapush {
namespace {

struct Fixture {
  SceneSpec scene = preset_scene("wide");
  Task task = make_task(scene, EpisodeConfig{});
  WorldState x0 = scene.initial_state();
};

ControlSequence random_controls(RngStream& rng, std::size_t n, double speed = 0.3) {
  ControlSequence u(n);
  for (Control& c : u) {
    c.velocity = {rng.uniform(-speed, speed), rng.uniform(0.0, speed), rng.uniform(-0.5, 0.5), 0.0};
  }
  return u;
}

bool same_controls(const ControlSequence& a, const ControlSequence& b) {
  if (a.size() != b.size()) {
    return false;
  }
  for (std::size_t t = 0; t < a.size(); ++t) {
    for (std::size_t j = 0; j < kNumJoints; ++j) {
      if (!testing::same_bits(a[t].velocity[j], b[t].velocity[j])) {
        return false;
      }
    }
  }
  return true;
}

TEST(SuffixSums, Examples) {
  EXPECT_EQ(suffix_sums({3.0, 2.0, 1.0}), (std::vector<double>{6.0, 3.0, 1.0}));
  EXPECT_EQ(suffix_sums({5.0}), (std::vector<double>{5.0}));
  EXPECT_TRUE(suffix_sums({}).empty());
}

TEST(Rollout, SuffixIdentityIsExact) {
  const Fixture f;
  RngStream rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    const ControlSequence u = random_controls(rng, 1 + trial % 4);
    const RolloutResult r = trajectory_rollout(f.task, f.x0, u);
    ASSERT_EQ(r.costs.size(), u.size());
    ASSERT_EQ(r.values.size(), u.size());
    ASSERT_EQ(r.states.size(), u.size() + 1);
    for (std::size_t j = 0; j + 1 < r.values.size(); ++j) {
      // Exact as a recurrence; the subtracted form only up to one rounding of values[j].
      EXPECT_EQ(r.values[j], r.costs[j] + r.values[j + 1]);
      EXPECT_LE(std::abs(r.values[j] - r.values[j + 1] - r.costs[j]), 1e-15 * r.values[j]);
    }
    EXPECT_EQ(r.values.back(), r.costs.back());
    EXPECT_GT(r.substeps, 0u);
  }
}

TEST(Rollout, EachActionCostsAtLeastTheActionConstant) {
  const Fixture f;
  RngStream rng(12);
  const ControlSequence u = random_controls(rng, 3);
  const RolloutResult r = trajectory_rollout(f.task, f.x0, u);
  for (double c : r.costs) {
    EXPECT_GE(c, f.task.costs.k_act);
  }
}

TEST(Perturb, EmpiricalStdMatchesSqrtNu) {
  const JointVector sqrt_nu{0.08, 0.05, 0.3, 0.02};
  SpeedLimits wide;
  wide.max = {100.0, 100.0, 100.0, 100.0};
  const ControlSequence zero(1);
  RngStream rng(3);
  constexpr int kSamples = 100000;
  JointVector sum{}, sum_sq{};
  for (int s = 0; s < kSamples; ++s) {
    const Perturbation p = perturb(zero, sqrt_nu, wide, rng);
    for (std::size_t j = 0; j < kNumJoints; ++j) {
      sum[j] += p.variation[0][j];
      sum_sq[j] += p.variation[0][j] * p.variation[0][j];
    }
  }
  for (std::size_t j = 0; j < kNumJoints; ++j) {
    const double mean = sum[j] / kSamples;
    const double sd = std::sqrt(sum_sq[j] / kSamples - mean * mean);
    EXPECT_NEAR(sd, sqrt_nu[j], 0.02 * sqrt_nu[j]) << "joint " << j;
  }
}

TEST(Perturb, ClampedVariationKeepsControlsInsideLimits) {
  const SpeedLimits limits;
  ControlSequence u(3);
  u[0].velocity = {0.99, -0.99, 3.1, 0.19};
  RngStream rng(4);
  for (int s = 0; s < 1000; ++s) {
    const Perturbation p = perturb(u, {0.5, 0.5, 1.0, 0.5}, limits, rng);
    const ControlSequence back = apply_variation(u, p.variation);
    for (std::size_t t = 0; t < u.size(); ++t) {
      for (std::size_t j = 0; j < kNumJoints; ++j) {
        EXPECT_LE(std::abs(p.controls[t].velocity[j]), limits.max[j]);
        EXPECT_EQ(back[t].velocity[j], p.controls[t].velocity[j]);
      }
    }
  }
}

TEST(Update, GreedyPicksCheapestLowestIndexOnTies) {
  EXPECT_EQ(greedy_index({3.0, 1.0, 2.0}), 1u);
  EXPECT_EQ(greedy_index({2.0, 1.0, 1.0}), 1u);
  EXPECT_EQ(greedy_index({1.0, 1.0}), 0u);
  EXPECT_THROW(greedy_index({}), std::invalid_argument);

  const ControlSequence u(1);
  Variation a(1), b(1);
  a[0] = {1.0, 0.0, 0.0, 0.0};
  b[0] = {0.0, 2.0, 0.0, 0.0};
  const ControlSequence out = update_greedy(u, {a, b}, {5.0, 4.0});
  EXPECT_EQ(out[0].velocity, (JointVector{0.0, 2.0, 0.0, 0.0}));
}

TEST(Update, WeightedThreeToOne) {
  // exp(-ln 3) = 1/3, so the weights normalize to 0.75 and 0.25.
  const ControlSequence u(1);
  Variation a(1), b(1);
  a[0] = {1.0, 0.0, 0.0, 0.0};
  b[0] = {0.0, 1.0, 0.0, 0.0};
  const ControlSequence out = update_weighted(u, {a, b}, {{0.0}, {std::log(3.0)}}, 1.0);
  EXPECT_NEAR(out[0].velocity[0], 0.75, 1e-12);
  EXPECT_NEAR(out[0].velocity[1], 0.25, 1e-12);

  // Same ratio with temperature 2 needs twice the cost gap.
  const ControlSequence hot = update_weighted(u, {a, b}, {{10.0}, {10.0 + 2.0 * std::log(3.0)}}, 2.0);
  EXPECT_NEAR(hot[0].velocity[0], 0.75, 1e-12);
}

TEST(Update, WeightedIsPerTimeStep) {
  const ControlSequence u(2);
  Variation a(2), b(2);
  a[0] = a[1] = {1.0, 0.0, 0.0, 0.0};
  b[0] = b[1] = {-1.0, 0.0, 0.0, 0.0};
  // a wins step 0 outright, b wins step 1 outright.
  const ControlSequence out = update_weighted(u, {a, b}, {{0.0, 100.0}, {100.0, 0.0}}, 1.0);
  EXPECT_NEAR(out[0].velocity[0], 1.0, 1e-12);
  EXPECT_NEAR(out[1].velocity[0], -1.0, 1e-12);
}

TEST(Update, GreedyEqualsWeightedForSingleSample) {
  RngStream rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    const ControlSequence u = random_controls(rng, 4);
    const Perturbation p = perturb(u, OptParams{}.sqrt_nu, SpeedLimits{}, rng);
    const ControlSequence g = update_greedy(u, {p.variation}, {rng.uniform(0.0, 10.0)});
    const ControlSequence w = update_weighted(u, {p.variation}, {{1.0, 2.0, 3.0, 4.0}}, rng.uniform(0.1, 5.0));
    for (std::size_t t = 0; t < u.size(); ++t) {
      for (std::size_t j = 0; j < kNumJoints; ++j) {
        EXPECT_NEAR(g[t].velocity[j], w[t].velocity[j], 1e-15);
      }
    }
  }
}

TEST(Optimize, GreedyAndWeightedAgreeAtOneSample) {
  const Fixture f;
  RngStream rng(6);
  const ControlSequence u = random_controls(rng, 2);
  OptParams p;
  p.K = 1;
  p.i_max = 5;
  p.c_thresh = 0.0;
  const OptResult g = optimize(f.task, f.x0, u, p, 77);
  p.rule = UpdateRule::kWeighted;
  const OptResult w = optimize(f.task, f.x0, u, p, 77);
  EXPECT_TRUE(same_controls(g.controls, w.controls));
  EXPECT_EQ(g.history, w.history);
}

TEST(Optimize, IncumbentCostNeverIncreases) {
  const Fixture f;
  OptParams p;
  p.K = 4;
  p.i_max = 6;
  p.c_thresh = 0.0;
  int violations = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    RngStream rng(derive_seed(seed, {9}));
    p.rule = seed % 2 == 0 ? UpdateRule::kGreedy : UpdateRule::kWeighted;
    const OptResult r = optimize(f.task, f.x0, random_controls(rng, 1 + seed % 3), p, seed);
    ASSERT_EQ(r.history.size(), static_cast<std::size_t>(r.iterations) + 1);
    EXPECT_EQ(r.history.front(), r.initial_cost);
    EXPECT_EQ(r.history.back(), r.rollout.total());
    for (std::size_t i = 1; i < r.history.size(); ++i) {
      violations += r.history[i] > r.history[i - 1] ? 1 : 0;
    }
  }
  EXPECT_EQ(violations, 0);
}

TEST(Optimize, StopsAtThreshold) {
  const Fixture f;
  RngStream rng(7);
  const ControlSequence u = random_controls(rng, 2);
  OptParams p;
  p.c_thresh = 1e9;
  const OptResult r = optimize(f.task, f.x0, u, p, 1);
  EXPECT_EQ(r.iterations, 0);
  EXPECT_TRUE(same_controls(r.controls, u));
  p.c_thresh = 0.0;
  p.i_max = 3;
  EXPECT_EQ(optimize(f.task, f.x0, u, p, 1).iterations, 3);
}

TEST(Optimize, DefaultThresholdIsActionCostPlusSlack) {
  EXPECT_DOUBLE_EQ(OptParams{}.threshold(CostParams{}, 20), 20.01);
  OptParams p;
  p.c_thresh = 3.0;
  EXPECT_DOUBLE_EQ(p.threshold(CostParams{}, 20), 3.0);
}

TEST(Optimize, ReproducibleAndIndependentOfWorkerCount) {
  const Fixture f;
  RngStream rng(8);
  const ControlSequence u = random_controls(rng, 3);
  OptParams p;
  p.K = 4;
  p.i_max = 4;
  p.c_thresh = 0.0;
  const OptResult a = optimize(f.task, f.x0, u, p, 42);
  const OptResult b = optimize(f.task, f.x0, u, p, 42);
  p.workers = 3;
  const OptResult c = optimize(f.task, f.x0, u, p, 42);
  EXPECT_TRUE(same_controls(a.controls, b.controls));
  EXPECT_TRUE(same_controls(a.controls, c.controls));
  EXPECT_EQ(a.history, c.history);
  EXPECT_EQ(a.substeps, c.substeps);
}

TEST(OptParams, Validation) {
  OptParams p;
  EXPECT_NO_THROW(p.validate());
  p.K = 0;
  EXPECT_THROW(p.validate(), std::invalid_argument);
  p = OptParams{};
  p.lambda = 0.0;
  EXPECT_THROW(p.validate(), std::invalid_argument);
  p = OptParams{};
  p.i_max = -1;
  EXPECT_THROW(p.validate(), std::invalid_argument);
  EXPECT_EQ(parse_update_rule(to_string(UpdateRule::kWeighted)), UpdateRule::kWeighted);
  EXPECT_THROW(parse_update_rule("fastest"), std::invalid_argument);
}

}  // namespace
}  // namespace tapush
