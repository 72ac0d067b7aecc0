#pragma once

#include <span>
#include <string>
#include <vector>

#include "spatial_arena/episode.hpp"
#include "spatial_arena/json_io.hpp"
#include "spatial_arena/qa.hpp"

namespace arena {

enum class CorrectnessMode { GroupRate, PerTrajectory };

struct RewardConfig {
  double tau_low = 0.25;
  double tau_high = 0.75;
  int n_max = 6;
  double alpha_explore = 0.1;
  double gamma_penalty = -0.1;
  int n_penalty = 4;
  double r_max = 1.0;
  double sigma = 0.2;
  double theta_threshold = 90.0;  // degrees
  double alpha_rep = 0.2;
  double w_c = 1.0;
  double w1 = 1.0;
  double w2 = 1.0;
  double w3 = 1.0;
  double iou_dup_threshold = 0.5;
  double view_dup_pos_m = 0.5;
  double view_dup_angle_deg = 15.0;
  double epsilon_clip = 0.2;
  double beta_kl = 0.01;
  CorrectnessMode correctness_mode = CorrectnessMode::GroupRate;

  /// Throws Error{InvalidArgument} naming the violated constraint.
  void validate() const;
};

Json to_json(const RewardConfig& cfg);
/// Missing keys keep their defaults; unknown keys are rejected.
RewardConfig reward_config_from_json(const Json& j);

/// Zoom region in normalized [0,1] BEV coordinates.
struct ZoomRegion {
  int floor = 0;
  BBox2D box;
};

struct ViewPose {
  Vec3 position;
  double yaw = 0.0;
  double pitch = 0.0;
};

struct RegionCounts {
  int n_uz = 0;
  int n_ur = 0;
  int n_u = 0;
  int n_rep = 0;
};

struct TrajectoryFeatures {
  std::vector<ZoomRegion> zooms;
  std::vector<ViewPose> views;
  RegionCounts counts;
  bool correct = false;
};

RegionCounts count_unique_regions(std::span<const ZoomRegion> zooms, std::span<const ViewPose> views,
                                  const RewardConfig& cfg);

/// Features of `calls`, with zoom boxes clamped and normalized by `bev_resolution`.
TrajectoryFeatures extract_features(std::span<const ToolCall> calls, bool correct, int bev_resolution,
                                    const RewardConfig& cfg);
/// Only calls that produced an observation count.
TrajectoryFeatures extract_features(const EpisodeState& state, int bev_resolution, const RewardConfig& cfg);

double explore_reward(double c, int n_u, const RewardConfig& cfg);
/// d is the final zoom center's distance from the target center over the BEV diagonal.
double bbox_goal_reward(double d, const RewardConfig& cfg);
double angle_goal_reward(double d_angle_deg, const RewardConfig& cfg);
double goal_reward(const TrajectoryFeatures& f, const QAItem& qa, const RewardConfig& cfg);
double repetition_penalty(int n_rep, const RewardConfig& cfg);

struct RewardBreakdown {
  double c = 0.0;  // correctness value used: group rate or own correctness
  double r_explore = 0.0;
  double r_goal = 0.0;
  double p_rep = 0.0;
  // Weighted contributions; total is their sum.
  double correctness_term = 0.0;
  double explore_term = 0.0;
  double goal_term = 0.0;
  double repetition_term = 0.0;
  double total = 0.0;
  RegionCounts counts;
  bool correct = false;
};

Json to_json(const RewardBreakdown& b);

/// `group_c` is the group correctness rate; PerTrajectory mode uses f.correct instead
/// for the correctness term. The exploration phase always follows group_c.
RewardBreakdown total_reward(const TrajectoryFeatures& f, double group_c, const QAItem& qa, const RewardConfig& cfg);

/// Population-std standardization. Throws Error{InvalidArgument} for fewer than 2 rewards.
std::vector<double> group_advantages(std::span<const double> rewards);

/// Clipped surrogate minus beta * mean KL. Throws Error{InvalidArgument} on
/// length mismatch, empty input, or a non-positive ratio.
double grpo_objective(std::span<const double> ratios, std::span<const double> advantages,
                      std::span<const double> kl, const RewardConfig& cfg);

struct GroupRewards {
  std::vector<RewardBreakdown> breakdowns;
  double c = 0.0;
  std::vector<double> advantages;
};

GroupRewards score_group(std::span<const TrajectoryFeatures> group, const QAItem& qa, const RewardConfig& cfg);
Json to_json(const GroupRewards& g);

}  // namespace arena
