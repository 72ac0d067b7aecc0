#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "spatial_arena/episode.hpp"
#include "spatial_arena/qa.hpp"
#include "spatial_arena/reward.hpp"

namespace arena {

enum class PolicyKind { OracleCoarseToFine, RandomExplorer, BEVOnlyGuesser, ExternalClient };
std::string_view to_string(PolicyKind k);
/// Accepts "oracle", "random", "bev-only", "external" and the enum spellings.
PolicyKind parse_policy_kind(std::string_view s);

struct PolicySpec {
  PolicyKind kind = PolicyKind::OracleCoarseToFine;
  std::uint64_t seed = 0;
  /// ExternalClient: command line run through /bin/sh; the harness speaks the
  /// NDJSON protocol on the child's stdin/stdout.
  std::string command;
};

/// A policy drives one episode at a time through Environment::step.
class Policy {
 public:
  virtual ~Policy() = default;
  /// Runs `state` to termination. `episode_seed` varies per rollout.
  virtual void run(const Environment& env, EpisodeState& state, std::uint64_t episode_seed) = 0;
  /// True if the last run lost contact with its client.
  virtual bool disconnected() const { return false; }
};

std::unique_ptr<Policy> make_policy(const PolicySpec& spec);

struct EpisodeLog {
  std::string qa_id;
  std::string scene_id;
  QuestionType qtype = QuestionType::Color;
  Trajectory trajectory;
  int tool_calls = 0;  // answer excluded
  bool correct = false;
  bool disconnected = false;
  RewardBreakdown reward;
};

Json to_json(const EpisodeLog& e);

struct EvalReport {
  std::string policy;
  std::map<QuestionType, double> accuracy;
  std::map<QuestionType, int> counts;
  double overall = 0.0;
  double avg_tool_calls = 0.0;
  int episodes = 0;
  int disconnects = 0;
  double wall_seconds = 0.0;
  std::vector<EpisodeLog> log;  // sorted by qa_id
};

/// Column order: Material, Color, Position, State, Shape, Counting, Overall.
inline constexpr std::array kReportColumns = {QuestionType::Material, QuestionType::Color, QuestionType::Position,
                                              QuestionType::State,    QuestionType::Shape, QuestionType::Counting};

/// Every QA item in `items` runs exactly once. Rewards use a group of one
/// (c = own correctness). Throws Error{NotFound} for unresolvable scenes.
EvalReport run_eval(const Environment& env, const std::vector<QAItem>& items, const PolicySpec& spec,
                    const RewardConfig& reward = {}, int workers = 1);

Json to_json(const EvalReport& r);
std::string render_table(const EvalReport& r);
/// One JSON line per episode.
std::string episode_log_jsonl(const EvalReport& r);

struct RolloutGroup {
  std::vector<Trajectory> trajectories;
  GroupRewards rewards;
};

/// G rollouts of one QA item; rollout i uses seed derive_seed(spec.seed, qa_id/i).
/// Throws Error{InvalidArgument} for G < 2.
RolloutGroup rollout_group(const Environment& env, const QAItem& qa, const PolicySpec& spec, int G,
                           const RewardConfig& reward = {});

}  // namespace arena
