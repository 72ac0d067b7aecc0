#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "fixtures.hpp"
#include "spatial_arena/config.hpp"
#include "spatial_arena/error.hpp"
#include "spatial_arena/reward.hpp"
#include "spatial_arena/rng.hpp"

namespace arena {
namespace {

const RewardConfig kDefault{};

QAItem target_item() {
  QAItem qa;
  qa.qa_id = "q";
  qa.gt_floor = 0;
  qa.bev_resolution = 512;
  qa.gt_bbox = {200, 200, 312, 312};
  qa.gt_pose = CameraPose{{5.0, 5.0, 1.4}, 0.0, 0.0};
  return qa;
}

TEST(Explore, WorkedExamples) {
  EXPECT_NEAR(explore_reward(0.1, 3, kDefault), 0.3, 1e-12);
  EXPECT_NEAR(explore_reward(0.9, 6, kDefault), -0.2, 1e-12);
  EXPECT_NEAR(explore_reward(0.5, 5, kDefault), 0.2, 1e-12);
}

TEST(Explore, ContinuousAtThresholds) {
  Rng rng(17);
  for (int i = 0; i < 200; ++i) {
    RewardConfig cfg;
    cfg.tau_low = rng.uniform(0.0, 0.5);
    cfg.tau_high = rng.uniform(cfg.tau_low + 0.2, 1.0);
    cfg.n_max = rng.uniform_int(0, 10);
    cfg.n_penalty = rng.uniform_int(0, 10);
    cfg.alpha_explore = rng.uniform(0.0, 0.3);
    cfg.gamma_penalty = -rng.uniform(0.0, 0.3);
    const int n_u = rng.uniform_int(0, 15);
    for (double tau : {cfg.tau_low, cfg.tau_high}) {
      const double at = explore_reward(tau, n_u, cfg);
      EXPECT_LT(std::abs(explore_reward(tau - 1e-6, n_u, cfg) - at), 1e-4);
      EXPECT_LT(std::abs(explore_reward(tau + 1e-6, n_u, cfg) - at), 1e-4);
    }
  }
}

TEST(Explore, LowPhaseMonotoneAndCapped) {
  double prev = -1.0;
  for (int n = 0; n <= 12; ++n) {
    const double r = explore_reward(0.0, n, kDefault);
    EXPECT_GE(r, prev);
    if (n >= kDefault.n_max) {
      EXPECT_DOUBLE_EQ(r, explore_reward(0.0, kDefault.n_max, kDefault));
    }
    prev = r;
  }
  EXPECT_DOUBLE_EQ(explore_reward(1.0, 4, kDefault), 0.0);
  EXPECT_NEAR(explore_reward(1.0, 9, kDefault), -0.5, 1e-12);
}

TEST(Goal, GaussianAndAngular) {
  EXPECT_DOUBLE_EQ(bbox_goal_reward(0.0, kDefault), 1.0);
  EXPECT_NEAR(bbox_goal_reward(0.2, kDefault), std::exp(-0.5), 1e-12);
  EXPECT_NEAR(bbox_goal_reward(0.2, kDefault), 0.6065, 1e-4);
  EXPECT_NEAR(angle_goal_reward(45.0, kDefault), 0.5, 1e-12);
  EXPECT_DOUBLE_EQ(angle_goal_reward(135.0, kDefault), 0.0);
  double prev = 2.0;
  for (double d = 0.0; d <= 1.0; d += 0.01) {
    const double r = bbox_goal_reward(d, kDefault);
    EXPECT_LT(r, prev);
    prev = r;
  }
  prev = 2.0;
  for (double a = 0.0; a <= 180.0; a += 1.0) {
    const double r = angle_goal_reward(a, kDefault);
    EXPECT_LE(r, prev);
    prev = r;
  }
}

TEST(Goal, FinalCallsOnly) {
  const QAItem qa = target_item();
  TrajectoryFeatures f;
  EXPECT_DOUBLE_EQ(goal_reward(f, qa, kDefault), 0.0);

  // View only, 45 degrees off in yaw.
  f.views.push_back({{5, 5, 1.4}, 45.0, 0.0});
  EXPECT_NEAR(goal_reward(f, qa, kDefault), 0.5, 1e-12);

  // Exact zoom center wins the max.
  f.zooms.push_back({0, BBox2D{0.0, 0.0, 0.2, 0.2}});
  f.zooms.push_back({0, BBox2D{200.0 / 512, 200.0 / 512, 312.0 / 512, 312.0 / 512}});
  EXPECT_NEAR(goal_reward(f, qa, kDefault), 1.0, 1e-12);

  // Final zoom on another floor scores nothing.
  f.zooms.push_back({1, BBox2D{200.0 / 512, 200.0 / 512, 312.0 / 512, 312.0 / 512}});
  EXPECT_NEAR(goal_reward(f, qa, kDefault), 0.5, 1e-12);
}

TEST(Goal, DistanceOverDiagonal) {
  const QAItem qa = target_item();
  TrajectoryFeatures f;
  // Center moved by (0.2, 0.2) normalized: d = 0.2*sqrt2/sqrt2 = 0.2.
  const double c = 256.0 / 512 + 0.2;
  f.zooms.push_back({0, BBox2D{c - 0.05, c - 0.05, c + 0.05, c + 0.05}});
  EXPECT_NEAR(goal_reward(f, qa, kDefault), std::exp(-0.5), 1e-12);
}

TEST(Goal, PitchCountsTowardAngle) {
  const QAItem qa = target_item();
  TrajectoryFeatures f;
  f.views.push_back({{5, 5, 1.4}, 0.0, -30.0});
  EXPECT_NEAR(goal_reward(f, qa, kDefault), 1.0 - 30.0 / 90.0, 1e-9);
  f.views.back() = {{5, 5, 1.4}, 90.0, 0.0};
  EXPECT_NEAR(goal_reward(f, qa, kDefault), 0.0, 1e-12);
}

TEST(Repetition, ClosedFormMatchesLoop) {
  EXPECT_DOUBLE_EQ(repetition_penalty(0, kDefault), 0.0);
  EXPECT_NEAR(repetition_penalty(1, kDefault), -0.2, 1e-12);
  EXPECT_NEAR(repetition_penalty(3, kDefault), -1.2, 1e-12);
  for (int n = 0; n <= 100; ++n) {
    double loop = 0.0;
    for (int i = 1; i <= n; ++i) loop -= kDefault.alpha_rep * i;
    EXPECT_NEAR(repetition_penalty(n, kDefault), loop, 1e-9);
  }
}

TEST(Regions, Examples) {
  std::vector<ZoomRegion> zooms = {{0, {0, 0, 0.1, 0.1}}, {0, {0.2, 0.2, 0.3, 0.3}}, {0, {0.5, 0.5, 0.6, 0.6}}};
  auto rc = count_unique_regions(zooms, {}, kDefault);
  EXPECT_EQ(rc.n_uz, 3);
  EXPECT_EQ(rc.n_rep, 0);

  zooms = {{0, {0, 0, 0.1, 0.1}}, {0, {0, 0, 0.1, 0.1}}, {0, {0.5, 0.5, 0.6, 0.6}}};
  rc = count_unique_regions(zooms, {}, kDefault);
  EXPECT_EQ(rc.n_uz, 2);
  EXPECT_EQ(rc.n_rep, 1);

  zooms = {{0, {0, 0, 2, 2}}, {0, {1, 1, 3, 3}}};
  EXPECT_NEAR(iou(zooms[0].box, zooms[1].box), 1.0 / 7.0, 1e-12);
  EXPECT_NEAR(testing::grid_iou(zooms[0].box, zooms[1].box, 0.01), 1.0 / 7.0, 1e-3);
  EXPECT_EQ(count_unique_regions(zooms, {}, kDefault).n_uz, 2);

  // Same box on a different floor is a different region.
  zooms = {{0, {0, 0, 0.1, 0.1}}, {1, {0, 0, 0.1, 0.1}}};
  EXPECT_EQ(count_unique_regions(zooms, {}, kDefault).n_uz, 2);
}

TEST(Regions, ViewDuplicates) {
  const std::vector<ViewPose> views = {{{1, 1, 1.4}, 0, 0},     {{1.3, 1, 1.4}, 10, 0},  // dup of 0
                                       {{1.3, 1, 1.4}, 30, 0},  // turned too far
                                       {{2, 1, 1.4}, 0, 0},     // moved too far
                                       {{1, 1, 1.4}, 0, 0}};    // dup of 0
  const auto rc = count_unique_regions({}, views, kDefault);
  EXPECT_EQ(rc.n_ur, 3);
  EXPECT_EQ(rc.n_rep, 2);
  EXPECT_EQ(rc.n_u, 3);
}

TEST(Regions, GreedyFirstOccurrence) {
  // C duplicates B but not A; B is not a representative, so C stays unique.
  const std::vector<ZoomRegion> zooms = {{0, {0.0, 0, 0.3, 0.1}}, {0, {0.05, 0, 0.35, 0.1}}, {0, {0.1, 0, 0.4, 0.1}}};
  const auto rc = count_unique_regions(zooms, {}, kDefault);
  EXPECT_GT(iou(zooms[2].box, zooms[1].box), 0.5);
  EXPECT_EQ(rc.n_uz, 2);
  EXPECT_EQ(rc.n_rep, 1);
}

TEST(Features, ClampAndNormalize) {
  const std::vector<ToolCall> calls = {ToolCall{ZoomIn{0, {-100, 0, 256, 256}}},
                                       ToolCall{RenderView{CameraPose{{1, 2, 1.4}, 30, -5}}},
                                       ToolCall{Answer{"x"}}};
  const TrajectoryFeatures f = extract_features(calls, true, 512, kDefault);
  ASSERT_EQ(f.zooms.size(), 1u);
  EXPECT_DOUBLE_EQ(f.zooms[0].box.x_min, 0.0);
  EXPECT_DOUBLE_EQ(f.zooms[0].box.x_max, 0.5);
  ASSERT_EQ(f.views.size(), 1u);
  EXPECT_DOUBLE_EQ(f.views[0].yaw, 30.0);
  EXPECT_EQ(f.counts.n_u, 2);
  EXPECT_TRUE(f.correct);
}

TEST(Total, WeightedSum) {
  const QAItem qa = target_item();
  TrajectoryFeatures zero;
  EXPECT_DOUBLE_EQ(total_reward(zero, 0.0, qa, kDefault).total, 0.0);

  // c=0.5 with N_u=5 gives R_exp=0.2; final zoom at d=0.2 gives 0.6065; one duplicate gives -0.2.
  TrajectoryFeatures f;
  const double c = 0.5 + 0.2;
  f.zooms = {{0, {c - 0.05, c - 0.05, c + 0.05, c + 0.05}}};
  f.views = {{{1, 1, 1.4}, 180, 0}, {{3, 1, 1.4}, 180, 0}, {{5, 1, 1.4}, 180, 0}, {{7, 1, 1.4}, 180, 0},
             {{7, 1, 1.4}, 180, 0}};
  f.counts = count_unique_regions(f.zooms, f.views, kDefault);
  ASSERT_EQ(f.counts.n_u, 5);
  ASSERT_EQ(f.counts.n_rep, 1);
  const RewardBreakdown b = total_reward(f, 0.5, qa, kDefault);
  EXPECT_NEAR(b.r_explore, 0.2, 1e-12);
  EXPECT_NEAR(b.r_goal, std::exp(-0.5), 1e-12);
  EXPECT_NEAR(b.p_rep, -0.2, 1e-12);
  EXPECT_NEAR(b.total, 0.5 + 0.2 + std::exp(-0.5) - 0.2, 1e-12);
  EXPECT_NEAR(b.total, 1.1065, 1e-4);

  RewardConfig doubled = kDefault;
  doubled.w2 = 2.0;
  const RewardBreakdown d = total_reward(f, 0.5, qa, doubled);
  EXPECT_DOUBLE_EQ(d.goal_term, 2.0 * b.goal_term);
  EXPECT_DOUBLE_EQ(d.explore_term, b.explore_term);
  EXPECT_DOUBLE_EQ(d.correctness_term, b.correctness_term);
  EXPECT_DOUBLE_EQ(d.repetition_term, b.repetition_term);
}

TEST(Total, PerTrajectoryMode) {
  const QAItem qa = target_item();
  RewardConfig cfg = kDefault;
  cfg.correctness_mode = CorrectnessMode::PerTrajectory;
  TrajectoryFeatures f;
  f.correct = true;
  EXPECT_DOUBLE_EQ(total_reward(f, 0.25, qa, cfg).correctness_term, 1.0);
  EXPECT_DOUBLE_EQ(total_reward(f, 0.25, qa, kDefault).correctness_term, 0.25);
}

TEST(Advantages, Example) {
  const std::vector<double> r = {1, 2, 3, 4};
  const auto a = group_advantages(r);
  const double sd = std::sqrt(1.25);
  const std::vector<double> want = {-1.5 / sd, -0.5 / sd, 0.5 / sd, 1.5 / sd};
  for (int i = 0; i < 4; ++i) EXPECT_NEAR(a[i], want[i], 1e-12);
  EXPECT_NEAR(a[0], -1.3416, 1e-4);
  const std::vector<double> flat = {0.3, 0.3, 0.3};
  for (double v : group_advantages(flat)) EXPECT_EQ(v, 0.0);
  const std::vector<double> one = {1.0};
  EXPECT_THROW(group_advantages(one), Error);
}

TEST(Advantages, ShiftInvariantAndOrderPreserving) {
  Rng rng(3);
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<double> r(8);
    for (auto& v : r) v = rng.uniform(-3.0, 3.0);
    const double shift = rng.uniform(-100.0, 100.0);
    std::vector<double> s = r;
    for (auto& v : s) v += shift;
    const auto a = group_advantages(r), b = group_advantages(s);
    for (std::size_t i = 0; i < r.size(); ++i) EXPECT_NEAR(a[i], b[i], 1e-9);
    EXPECT_EQ(std::ranges::max_element(a) - a.begin(), std::ranges::max_element(r) - r.begin());
    const double mean = std::accumulate(a.begin(), a.end(), 0.0) / 8.0;
    double var = 0.0;
    for (double v : a) var += (v - mean) * (v - mean);
    EXPECT_LT(std::abs(mean), 1e-9);
    EXPECT_NEAR(std::sqrt(var / 8.0), 1.0, 1e-9);
  }
}

TEST(Grpo, Examples) {
  RewardConfig cfg = kDefault;
  cfg.beta_kl = 0.0;
  const std::vector<double> one = {1.0}, zero = {0.0};
  const std::vector<double> r2 = {2.0}, a_pos = {1.0}, a_neg = {-1.0};
  EXPECT_NEAR(grpo_objective(r2, a_pos, zero, cfg), 1.2, 1e-12);
  EXPECT_NEAR(grpo_objective(r2, a_neg, zero, cfg), -2.0, 1e-12);
  const std::vector<double> rewards = {0.1, 0.7, 0.3, 0.9};
  const auto adv = group_advantages(rewards);
  const std::vector<double> ones(4, 1.0), zeros(4, 0.0);
  EXPECT_NEAR(grpo_objective(ones, adv, zeros, cfg), 0.0, 1e-12);
  const std::vector<double> kl = {0.5, 0.5, 1.0, 1.0};
  EXPECT_NEAR(grpo_objective(ones, adv, kl, kDefault), -0.01 * 0.75, 1e-12);
  EXPECT_THROW(grpo_objective(ones, adv, one, cfg), Error);
  const std::vector<double> neg = {-1.0};
  EXPECT_THROW(grpo_objective(neg, a_pos, zero, cfg), Error);
}

TEST(Grpo, ClipSaturatesForPositiveAdvantage) {
  RewardConfig cfg = kDefault;
  const std::vector<double> a = {0.8}, kl = {0.0};
  for (double ratio : {1.25, 1.5, 2.0, 3.0}) {
    const double h = 1e-6;
    const std::vector<double> lo = {ratio - h}, hi = {ratio + h};
    const double deriv = (grpo_objective(hi, a, kl, cfg) - grpo_objective(lo, a, kl, cfg)) / (2 * h);
    EXPECT_NEAR(deriv, 0.0, 1e-9) << ratio;
  }
  const double h = 1e-6;
  const std::vector<double> lo = {1.0 - h}, hi = {1.0 + h};
  EXPECT_NEAR((grpo_objective(hi, a, kl, cfg) - grpo_objective(lo, a, kl, cfg)) / (2 * h), 0.8, 1e-6);
}

TEST(Group, ScoresAndAdvantages) {
  const QAItem qa = target_item();
  std::vector<TrajectoryFeatures> g(4);
  g[0].correct = true;
  g[1].correct = true;
  g[2].zooms = {{0, {0.4, 0.4, 0.6, 0.6}}};
  g[2].counts = count_unique_regions(g[2].zooms, {}, kDefault);
  const GroupRewards r = score_group(g, qa, kDefault);
  EXPECT_DOUBLE_EQ(r.c, 0.5);
  ASSERT_EQ(r.breakdowns.size(), 4u);
  std::vector<double> totals;
  for (const auto& b : r.breakdowns) totals.push_back(b.total);
  const auto adv = group_advantages(totals);
  for (int i = 0; i < 4; ++i) EXPECT_DOUBLE_EQ(r.advantages[i], adv[i]);
  EXPECT_GT(r.advantages[2], r.advantages[0]);
  EXPECT_THROW(score_group(std::span(g).first(1), qa, kDefault), Error);

  const Json j = to_json(r);
  EXPECT_EQ(j["rewards"].size(), 4u);
  EXPECT_DOUBLE_EQ(j["rewards"][2]["total"].get<double>(), r.breakdowns[2].total);
}

TEST(Config, JsonAndToml) {
  const RewardConfig a = reward_config_from_json(to_json(kDefault));
  EXPECT_EQ(to_json(a), to_json(kDefault));

  const RewardConfig b = reward_config_from_json(toml_to_json("[reward]\nsigma = 0.3\nn_max = 4\n"
                                                              "correctness_mode = \"per_trajectory\"\n"));
  EXPECT_DOUBLE_EQ(b.sigma, 0.3);
  EXPECT_EQ(b.n_max, 4);
  EXPECT_EQ(b.correctness_mode, CorrectnessMode::PerTrajectory);
  EXPECT_DOUBLE_EQ(b.tau_low, 0.25);

  EXPECT_THROW(reward_config_from_json(parse_json(R"({"sigmaa":1})")), Error);
  EXPECT_THROW(reward_config_from_json(parse_json(R"({"sigma":0})")), Error);
  EXPECT_THROW(reward_config_from_json(parse_json(R"({"tau_low":0.8,"tau_high":0.5})")), Error);
  EXPECT_THROW(reward_config_from_json(parse_json(R"({"gamma_penalty":0.1})")), Error);
  EXPECT_THROW(reward_config_from_json(parse_json(R"({"n_max":1.5})")), Error);
  EXPECT_THROW(reward_config_from_json(parse_json(R"({"correctness_mode":"vote"})")), Error);
}

}  // namespace
}  // namespace arena
