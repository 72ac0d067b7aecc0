#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "spatial_arena/json_io.hpp"
#include "spatial_arena/qa.hpp"
#include "spatial_arena/renderer.hpp"
#include "spatial_arena/scene.hpp"

namespace arena {

struct ZoomIn {
  int floor = 0;
  BBox2D bbox;  // BEV pixels
  friend bool operator==(const ZoomIn&, const ZoomIn&) = default;
};

struct RenderView {
  CameraPose pose;
  friend bool operator==(const RenderView&, const RenderView&) = default;
};

struct Answer {
  std::string text;
  friend bool operator==(const Answer&, const Answer&) = default;
};

enum class ToolKind { ZoomIn, RenderView, Answer };
std::string_view to_string(ToolKind k);

struct ToolCall {
  std::variant<ZoomIn, RenderView, Answer> params;
  int step_index = 0;

  ToolKind kind() const { return static_cast<ToolKind>(params.index()); }
  friend bool operator==(const ToolCall&, const ToolCall&) = default;
};

/// Wire shape: {"name":"zoom_in","floor":f,"bbox":[...]}, {"name":"render_view","pos":[...],"theta":[...]}
/// or {"name":"answer","text":...}. Throws Error{ProtocolError} on malformed input.
Json to_json(const ToolCall& call);
ToolCall tool_call_from_json(const Json& j);

struct EnvConfig {
  int step_budget = 12;  // tool calls per episode, the answer excluded
  int bev_resolution = kDefaultBevResolution;
  int zoom_resolution = kDefaultZoomResolution;
  int view_resolution = kDefaultViewResolution;
  double fov = kDefaultFov;

  void validate() const;
};

struct Observation {
  std::vector<Image> images;
  std::vector<std::string> hashes;
  std::string note;
  bool clamped = false;
  bool error = false;
  bool terminal = false;
};

struct HistoryEntry {
  ToolCall call;
  std::string digest;  // joined image hashes, or "error:<code>"
  bool valid = true;
};

enum class Termination { None, Answered, ForcedTermination };
std::string_view to_string(Termination t);

struct EpisodeState {
  std::string episode_id;
  std::string scene_id;
  std::string qa_id;
  std::string question;
  std::vector<HistoryEntry> history;
  Observation current;
  int t = 0;
  bool terminated = false;
  Termination termination = Termination::None;
  std::optional<std::string> answer;
  bool correct = false;

  /// ZoomIn/RenderView calls so far.
  int tool_calls() const;
};

struct Trajectory {
  std::string episode_id;
  std::string scene_id;
  std::string qa_id;
  std::vector<ToolCall> calls;
  std::string answer;
  std::vector<std::string> observation_hashes;  // per step, in call order
  bool correct = false;
  bool forced = false;

  friend bool operator==(const Trajectory&, const Trajectory&) = default;
};

Trajectory to_trajectory(const EpisodeState& state);
Json to_json(const Trajectory& traj);
Trajectory trajectory_from_json(const Json& j);

/// Holds immutable scenes and QA items; episode state lives with the caller.
class Environment {
 public:
  explicit Environment(EnvConfig cfg = {});

  const EnvConfig& config() const { return cfg_; }
  void add_scene(Scene scene);
  void add_qa(QAItem qa);
  /// Throw Error{NotFound}.
  const Scene& scene(const std::string& scene_id) const;
  const QAItem& qa(const std::string& qa_id) const;
  std::shared_ptr<const Scene> scene_ptr(const std::string& scene_id) const;
  std::vector<std::string> qa_ids() const;

  /// Initial observation is one BEV image per floor.
  EpisodeState start_episode(const std::string& scene_id, const std::string& qa_id,
                             std::string episode_id = {}) const;
  /// Throws Error{ProtocolError} for a terminated episode or a malformed call;
  /// neither consumes a step.
  Observation step(EpisodeState& state, const ToolCall& call) const;

 private:
  Observation observe_zoom(const Scene& scene, const ZoomIn& z) const;
  Observation observe_view(const Scene& scene, const RenderView& v) const;

  EnvConfig cfg_;
  std::map<std::string, std::shared_ptr<const Scene>> scenes_;
  std::map<std::string, QAItem> qa_;
};

/// Observation hashes obtained by replaying a trajectory's calls from a fresh episode.
std::vector<std::string> replay_hashes(const Environment& env, const Trajectory& traj);

/// Zoom bbox after clamping to the BEV canvas, as the environment renders it.
ClampedBBox clamp_zoom(const BBox2D& bbox, int bev_resolution);

}  // namespace arena
