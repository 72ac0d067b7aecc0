#include "spatial_arena/reward.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/format.h>
#include <numeric>

#include "spatial_arena/error.hpp"

namespace arena {

void RewardConfig::validate() const {
  auto fail = [](std::string_view msg) { throw Error(ErrorCode::InvalidArgument, std::string(msg)); };
  if (!(0.0 <= tau_low && tau_low < tau_high && tau_high <= 1.0)) fail("need 0 <= tau_low < tau_high <= 1");
  if (n_max < 0 || n_penalty < 0) fail("n_max and n_penalty must be >= 0");
  if (!(sigma > 0.0)) fail("sigma must be > 0");
  if (!(theta_threshold > 0.0)) fail("theta_threshold must be > 0");
  if (!(alpha_rep >= 0.0)) fail("alpha_rep must be >= 0");
  if (!(gamma_penalty <= 0.0)) fail("gamma_penalty must be <= 0");
  if (!(iou_dup_threshold >= 0.0 && iou_dup_threshold <= 1.0)) fail("iou_dup_threshold must be in [0, 1]");
  if (!(view_dup_pos_m >= 0.0) || !(view_dup_angle_deg >= 0.0)) fail("view duplicate thresholds must be >= 0");
  if (!(epsilon_clip >= 0.0 && epsilon_clip < 1.0)) fail("epsilon_clip must be in [0, 1)");
  if (!(beta_kl >= 0.0)) fail("beta_kl must be >= 0");
  for (double v : {alpha_explore, r_max, w_c, w1, w2, w3}) {
    if (!std::isfinite(v)) fail("reward weights must be finite");
  }
}

Json to_json(const RewardConfig& cfg) {
  return Json{{"tau_low", cfg.tau_low},
              {"tau_high", cfg.tau_high},
              {"n_max", cfg.n_max},
              {"alpha_explore", cfg.alpha_explore},
              {"gamma_penalty", cfg.gamma_penalty},
              {"n_penalty", cfg.n_penalty},
              {"r_max", cfg.r_max},
              {"sigma", cfg.sigma},
              {"theta_threshold", cfg.theta_threshold},
              {"alpha_rep", cfg.alpha_rep},
              {"w_c", cfg.w_c},
              {"w1", cfg.w1},
              {"w2", cfg.w2},
              {"w3", cfg.w3},
              {"iou_dup_threshold", cfg.iou_dup_threshold},
              {"view_dup_pos_m", cfg.view_dup_pos_m},
              {"view_dup_angle_deg", cfg.view_dup_angle_deg},
              {"epsilon_clip", cfg.epsilon_clip},
              {"beta_kl", cfg.beta_kl},
              {"correctness_mode", cfg.correctness_mode == CorrectnessMode::GroupRate ? "group_rate" : "per_trajectory"}};
}

RewardConfig reward_config_from_json(const Json& j) {
  if (!j.is_object()) throw Error(ErrorCode::InvalidArgument, "reward config must be an object");
  // A [reward] table is accepted as well as top-level keys.
  const Json& src = j.contains("reward") && j["reward"].is_object() ? j["reward"] : j;
  RewardConfig cfg;
  auto real = [&](const char* key, double& out) {
    if (!src.contains(key)) return;
    if (!src[key].is_number()) throw Error(ErrorCode::InvalidArgument, fmt::format("{} must be a number", key));
    out = src[key].get<double>();
  };
  auto integer = [&](const char* key, int& out) {
    if (!src.contains(key)) return;
    if (!src[key].is_number_integer()) throw Error(ErrorCode::InvalidArgument, fmt::format("{} must be an integer", key));
    out = src[key].get<int>();
  };
  for (const auto& [key, _] : src.items()) {
    if (!to_json(cfg).contains(key)) throw Error(ErrorCode::InvalidArgument, fmt::format("unknown reward key '{}'", key));
  }
  real("tau_low", cfg.tau_low);
  real("tau_high", cfg.tau_high);
  integer("n_max", cfg.n_max);
  real("alpha_explore", cfg.alpha_explore);
  real("gamma_penalty", cfg.gamma_penalty);
  integer("n_penalty", cfg.n_penalty);
  real("r_max", cfg.r_max);
  real("sigma", cfg.sigma);
  real("theta_threshold", cfg.theta_threshold);
  real("alpha_rep", cfg.alpha_rep);
  real("w_c", cfg.w_c);
  real("w1", cfg.w1);
  real("w2", cfg.w2);
  real("w3", cfg.w3);
  real("iou_dup_threshold", cfg.iou_dup_threshold);
  real("view_dup_pos_m", cfg.view_dup_pos_m);
  real("view_dup_angle_deg", cfg.view_dup_angle_deg);
  real("epsilon_clip", cfg.epsilon_clip);
  real("beta_kl", cfg.beta_kl);
  if (src.contains("correctness_mode")) {
    const std::string mode = src["correctness_mode"].is_string() ? src["correctness_mode"].get<std::string>() : "";
    if (mode == "group_rate") {
      cfg.correctness_mode = CorrectnessMode::GroupRate;
    } else if (mode == "per_trajectory") {
      cfg.correctness_mode = CorrectnessMode::PerTrajectory;
    } else {
      throw Error(ErrorCode::InvalidArgument, "correctness_mode must be \"group_rate\" or \"per_trajectory\"");
    }
  }
  cfg.validate();
  return cfg;
}

RegionCounts count_unique_regions(std::span<const ZoomRegion> zooms, std::span<const ViewPose> views,
                                  const RewardConfig& cfg) {
  RegionCounts rc;
  std::vector<const ZoomRegion*> zoom_reps;
  for (const auto& z : zooms) {
    const bool dup = std::ranges::any_of(zoom_reps, [&](const ZoomRegion* r) {
      return r->floor == z.floor && iou(r->box, z.box) > cfg.iou_dup_threshold;
    });
    if (dup) {
      ++rc.n_rep;
    } else {
      zoom_reps.push_back(&z);
    }
  }
  std::vector<const ViewPose*> view_reps;
  for (const auto& v : views) {
    const bool dup = std::ranges::any_of(view_reps, [&](const ViewPose* r) {
      return norm(r->position - v.position) < cfg.view_dup_pos_m &&
             view_angle_between(r->yaw, r->pitch, v.yaw, v.pitch) < cfg.view_dup_angle_deg;
    });
    if (dup) {
      ++rc.n_rep;
    } else {
      view_reps.push_back(&v);
    }
  }
  rc.n_uz = static_cast<int>(zoom_reps.size());
  rc.n_ur = static_cast<int>(view_reps.size());
  rc.n_u = rc.n_uz + rc.n_ur;
  return rc;
}

TrajectoryFeatures extract_features(std::span<const ToolCall> calls, bool correct, int bev_resolution,
                                    const RewardConfig& cfg) {
  TrajectoryFeatures f;
  f.correct = correct;
  const double res = bev_resolution;
  for (std::size_t i = 0; i < calls.size(); ++i) {
    if (const auto* z = std::get_if<ZoomIn>(&calls[i].params)) {
      const BBox2D b = clamp_zoom(z->bbox, bev_resolution).box;
      f.zooms.push_back({z->floor, BBox2D{b.x_min / res, b.y_min / res, b.x_max / res, b.y_max / res}});
    } else if (const auto* v = std::get_if<RenderView>(&calls[i].params)) {
      f.views.push_back({v->pose.position, v->pose.yaw, v->pose.pitch});
    }
  }
  f.counts = count_unique_regions(f.zooms, f.views, cfg);
  return f;
}

TrajectoryFeatures extract_features(const EpisodeState& state, int bev_resolution, const RewardConfig& cfg) {
  std::vector<ToolCall> calls;
  for (const auto& h : state.history) {
    if (h.valid) calls.push_back(h.call);
  }
  return extract_features(calls, state.correct, bev_resolution, cfg);
}

double explore_reward(double c, int n_u, const RewardConfig& cfg) {
  const double low = std::min(n_u, cfg.n_max) * cfg.alpha_explore;
  const double high = cfg.gamma_penalty * std::max(0, n_u - cfg.n_penalty);
  if (c <= cfg.tau_low) return low;
  if (c >= cfg.tau_high) return high;
  const double lambda = (cfg.tau_high - c) / (cfg.tau_high - cfg.tau_low);
  return lambda * low + (1.0 - lambda) * high;
}

double bbox_goal_reward(double d, const RewardConfig& cfg) {
  return cfg.r_max * std::exp(-(d * d) / (2.0 * cfg.sigma * cfg.sigma));
}

double angle_goal_reward(double d_angle_deg, const RewardConfig& cfg) {
  return cfg.r_max * std::max(0.0, 1.0 - d_angle_deg / cfg.theta_threshold);
}

double goal_reward(const TrajectoryFeatures& f, const QAItem& qa, const RewardConfig& cfg) {
  double r_bbox = 0.0, r_angle = 0.0;
  if (!f.zooms.empty()) {
    const ZoomRegion& z = f.zooms.back();
    if (z.floor == qa.gt_floor) {
      const Vec2 gt = qa.gt_bbox.center() * (1.0 / qa.bev_resolution);
      const double d = norm(z.box.center() - gt) / std::numbers::sqrt2;
      r_bbox = bbox_goal_reward(d, cfg);
    }
  }
  if (!f.views.empty()) {
    const ViewPose& v = f.views.back();
    r_angle = angle_goal_reward(view_angle_between(v.yaw, v.pitch, qa.gt_pose.yaw, qa.gt_pose.pitch), cfg);
  }
  return std::max(r_bbox, r_angle);
}

double repetition_penalty(int n_rep, const RewardConfig& cfg) {
  return -cfg.alpha_rep * n_rep * (n_rep + 1) / 2.0;
}

Json to_json(const RewardBreakdown& b) {
  return Json{{"c", b.c},
              {"r_explore", b.r_explore},
              {"r_goal", b.r_goal},
              {"p_rep", b.p_rep},
              {"terms", Json{{"correctness", b.correctness_term},
                             {"explore", b.explore_term},
                             {"goal", b.goal_term},
                             {"repetition", b.repetition_term}}},
              {"total", b.total},
              {"n_uz", b.counts.n_uz},
              {"n_ur", b.counts.n_ur},
              {"n_u", b.counts.n_u},
              {"n_rep", b.counts.n_rep},
              {"correct", b.correct}};
}

RewardBreakdown total_reward(const TrajectoryFeatures& f, double group_c, const QAItem& qa, const RewardConfig& cfg) {
  RewardBreakdown b;
  b.counts = f.counts;
  b.correct = f.correct;
  b.c = cfg.correctness_mode == CorrectnessMode::GroupRate ? group_c : (f.correct ? 1.0 : 0.0);
  b.r_explore = explore_reward(group_c, f.counts.n_u, cfg);
  b.r_goal = goal_reward(f, qa, cfg);
  b.p_rep = repetition_penalty(f.counts.n_rep, cfg);
  b.correctness_term = cfg.w_c * b.c;
  b.explore_term = cfg.w1 * b.r_explore;
  b.goal_term = cfg.w2 * b.r_goal;
  b.repetition_term = cfg.w3 * b.p_rep;
  b.total = b.correctness_term + b.explore_term + b.goal_term + b.repetition_term;
  return b;
}

std::vector<double> group_advantages(std::span<const double> rewards) {
  if (rewards.size() < 2) throw Error(ErrorCode::InvalidArgument, "group advantages need at least 2 rewards");
  const double n = static_cast<double>(rewards.size());
  const double mean = std::accumulate(rewards.begin(), rewards.end(), 0.0) / n;
  double var = 0.0;
  for (double r : rewards) var += (r - mean) * (r - mean);
  const double sd = std::sqrt(var / n);
  std::vector<double> out(rewards.size(), 0.0);
  if (sd < 1e-8) return out;
  for (std::size_t i = 0; i < rewards.size(); ++i) out[i] = (rewards[i] - mean) / sd;
  return out;
}

double grpo_objective(std::span<const double> ratios, std::span<const double> advantages,
                      std::span<const double> kl, const RewardConfig& cfg) {
  if (ratios.empty() || ratios.size() != advantages.size() || ratios.size() != kl.size()) {
    throw Error(ErrorCode::InvalidArgument,
                fmt::format("grpo_objective needs equal non-empty lengths (got {}, {}, {})", ratios.size(),
                            advantages.size(), kl.size()));
  }
  double surrogate = 0.0, kl_sum = 0.0;
  for (std::size_t i = 0; i < ratios.size(); ++i) {
    if (!(ratios[i] > 0.0)) throw Error(ErrorCode::InvalidArgument, "probability ratios must be > 0");
    const double clipped = std::clamp(ratios[i], 1.0 - cfg.epsilon_clip, 1.0 + cfg.epsilon_clip);
    surrogate += std::min(ratios[i] * advantages[i], clipped * advantages[i]);
    kl_sum += kl[i];
  }
  const double g = static_cast<double>(ratios.size());
  return surrogate / g - cfg.beta_kl * kl_sum / g;
}

GroupRewards score_group(std::span<const TrajectoryFeatures> group, const QAItem& qa, const RewardConfig& cfg) {
  if (group.size() < 2) throw Error(ErrorCode::InvalidArgument, "a rollout group needs G >= 2");
  GroupRewards g;
  const auto correct = std::ranges::count_if(group, [](const TrajectoryFeatures& f) { return f.correct; });
  g.c = static_cast<double>(correct) / static_cast<double>(group.size());
  std::vector<double> totals;
  for (const auto& f : group) {
    g.breakdowns.push_back(total_reward(f, g.c, qa, cfg));
    totals.push_back(g.breakdowns.back().total);
  }
  g.advantages = group_advantages(totals);
  return g;
}

Json to_json(const GroupRewards& g) {
  Json rewards = Json::array();
  for (const auto& b : g.breakdowns) rewards.push_back(to_json(b));
  return Json{{"c", g.c}, {"rewards", rewards}, {"advantages", g.advantages}};
}

}  // namespace arena
