#include "spatial_arena/episode.hpp"

#include <cmath>
#include <fmt/format.h>

#include "spatial_arena/error.hpp"

namespace arena {

std::string_view to_string(ToolKind k) {
  switch (k) {
    case ToolKind::ZoomIn: return "zoom_in";
    case ToolKind::RenderView: return "render_view";
    case ToolKind::Answer: return "answer";
  }
  return "?";
}

std::string_view to_string(Termination t) {
  switch (t) {
    case Termination::None: return "none";
    case Termination::Answered: return "answered";
    case Termination::ForcedTermination: return "forced_termination";
  }
  return "?";
}

Json to_json(const ToolCall& call) {
  return std::visit(
      [](const auto& p) -> Json {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, ZoomIn>) {
          return Json{{"name", "zoom_in"}, {"floor", p.floor}, {"bbox", to_json(p.bbox)}};
        } else if constexpr (std::is_same_v<T, RenderView>) {
          return Json{{"name", "render_view"},
                      {"pos", to_json(p.pose.position)},
                      {"theta", Json::array({p.pose.yaw, p.pose.pitch, p.pose.roll})}};
        } else {
          return Json{{"name", "answer"}, {"text", p.text}};
        }
      },
      call.params);
}

namespace {

double finite_number(const Json& j, std::string_view what) {
  if (!j.is_number()) throw Error(ErrorCode::ProtocolError, fmt::format("{} must be a number", what));
  const double v = j.get<double>();
  if (!std::isfinite(v)) throw Error(ErrorCode::ProtocolError, fmt::format("{} must be finite", what));
  return v;
}

std::vector<double> number_array(const Json& j, std::size_t n, std::string_view what) {
  if (!j.is_array() || j.size() != n) {
    throw Error(ErrorCode::ProtocolError, fmt::format("{} must be an array of {} numbers", what, n));
  }
  std::vector<double> out;
  for (const auto& v : j) out.push_back(finite_number(v, what));
  return out;
}

}  // namespace

ToolCall tool_call_from_json(const Json& j) {
  if (!j.is_object() || !j.contains("name") || !j["name"].is_string()) {
    throw Error(ErrorCode::ProtocolError, "tool call needs a string \"name\"");
  }
  const std::string name = j["name"].get<std::string>();
  ToolCall call;
  if (name == "zoom_in") {
    if (!j.contains("floor") || !j["floor"].is_number_integer()) {
      throw Error(ErrorCode::ProtocolError, "zoom_in needs an integer \"floor\"");
    }
    const auto b = number_array(j.contains("bbox") ? j["bbox"] : Json(), 4, "bbox");
    call.params = ZoomIn{j["floor"].get<int>(), BBox2D{b[0], b[1], b[2], b[3]}};
  } else if (name == "render_view") {
    const auto p = number_array(j.contains("pos") ? j["pos"] : Json(), 3, "pos");
    const auto th = number_array(j.contains("theta") ? j["theta"] : Json(), 3, "theta");
    CameraPose pose;
    pose.position = {p[0], p[1], p[2]};
    pose.yaw = th[0];
    pose.pitch = th[1];
    pose.roll = th[2];
    if (j.contains("fov")) pose.fov = finite_number(j["fov"], "fov");
    call.params = RenderView{pose};
  } else if (name == "answer") {
    if (!j.contains("text") || !j["text"].is_string()) {
      throw Error(ErrorCode::ProtocolError, "answer needs a string \"text\"");
    }
    call.params = Answer{j["text"].get<std::string>()};
  } else {
    throw Error(ErrorCode::ProtocolError, fmt::format("unknown tool '{}'", name));
  }
  return call;
}

void EnvConfig::validate() const {
  if (step_budget < 1) throw Error(ErrorCode::InvalidArgument, "step_budget must be >= 1");
  if (bev_resolution < 8 || zoom_resolution < 8 || view_resolution < 8) {
    throw Error(ErrorCode::InvalidArgument, "resolutions must be >= 8");
  }
  if (!(fov > 30.0 && fov < 120.0)) throw Error(ErrorCode::InvalidArgument, "fov must be in (30, 120)");
}

int EpisodeState::tool_calls() const {
  int n = 0;
  for (const auto& h : history) n += h.call.kind() != ToolKind::Answer;
  return n;
}

Trajectory to_trajectory(const EpisodeState& state) {
  Trajectory t;
  t.episode_id = state.episode_id;
  t.scene_id = state.scene_id;
  t.qa_id = state.qa_id;
  for (const auto& h : state.history) {
    t.calls.push_back(h.call);
    t.observation_hashes.push_back(h.digest);
  }
  t.answer = state.answer.value_or("");
  t.correct = state.correct;
  t.forced = state.termination == Termination::ForcedTermination;
  return t;
}

Json to_json(const Trajectory& traj) {
  Json calls = Json::array();
  for (const auto& c : traj.calls) calls.push_back(to_json(c));
  return Json{{"episode_id", traj.episode_id},
              {"scene_id", traj.scene_id},
              {"qa_id", traj.qa_id},
              {"calls", calls},
              {"answer", traj.answer},
              {"obs_hashes", traj.observation_hashes},
              {"correct", traj.correct},
              {"forced", traj.forced}};
}

Trajectory trajectory_from_json(const Json& j) {
  try {
    Trajectory t;
    t.episode_id = j.at("episode_id").get<std::string>();
    t.scene_id = j.at("scene_id").get<std::string>();
    t.qa_id = j.at("qa_id").get<std::string>();
    int k = 0;
    for (const auto& c : j.at("calls")) {
      ToolCall call = tool_call_from_json(c);
      call.step_index = k++;
      t.calls.push_back(std::move(call));
    }
    t.answer = j.at("answer").get<std::string>();
    t.observation_hashes = j.at("obs_hashes").get<std::vector<std::string>>();
    t.correct = j.at("correct").get<bool>();
    t.forced = j.value("forced", false);
    return t;
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::InvalidArgument, fmt::format("bad trajectory: {}", e.what()));
  }
}

Environment::Environment(EnvConfig cfg) : cfg_(cfg) { cfg_.validate(); }

void Environment::add_scene(Scene scene) {
  std::string id = scene.scene_id;
  scenes_[id] = std::make_shared<const Scene>(std::move(scene));
}

void Environment::add_qa(QAItem qa) {
  std::string id = qa.qa_id;
  qa_[id] = std::move(qa);
}

std::shared_ptr<const Scene> Environment::scene_ptr(const std::string& scene_id) const {
  auto it = scenes_.find(scene_id);
  if (it == scenes_.end()) throw Error(ErrorCode::NotFound, fmt::format("unknown scene '{}'", scene_id));
  return it->second;
}

const Scene& Environment::scene(const std::string& scene_id) const { return *scene_ptr(scene_id); }

const QAItem& Environment::qa(const std::string& qa_id) const {
  auto it = qa_.find(qa_id);
  if (it == qa_.end()) throw Error(ErrorCode::NotFound, fmt::format("unknown QA item '{}'", qa_id));
  return it->second;
}

std::vector<std::string> Environment::qa_ids() const {
  std::vector<std::string> ids;
  for (const auto& [id, _] : qa_) ids.push_back(id);
  return ids;
}

EpisodeState Environment::start_episode(const std::string& scene_id, const std::string& qa_id,
                                        std::string episode_id) const {
  const Scene& s = scene(scene_id);
  const QAItem& item = qa(qa_id);
  if (item.scene_id != scene_id) {
    throw Error(ErrorCode::NotFound, fmt::format("QA item '{}' does not belong to scene '{}'", qa_id, scene_id));
  }
  EpisodeState state;
  state.episode_id = episode_id.empty() ? fmt::format("{}#0", qa_id) : std::move(episode_id);
  state.scene_id = scene_id;
  state.qa_id = qa_id;
  state.question = item.question;
  for (const auto& fl : s.floors) {
    state.current.images.push_back(render_bev(s, fl.index, cfg_.bev_resolution));
    state.current.hashes.push_back(content_hash(state.current.images.back()));
  }
  state.current.note = fmt::format("{} floor(s); bird's-eye views at {}x{} px, floor 1 first. Question: {}",
                                   s.floor_count(), cfg_.bev_resolution, cfg_.bev_resolution, item.question);
  return state;
}

ClampedBBox clamp_zoom(const BBox2D& bbox, int bev_resolution) {
  return clamp_bbox(bbox, bev_resolution, bev_resolution);
}

namespace {

Observation error_observation(const Error& e) {
  Observation obs;
  obs.error = true;
  obs.note = fmt::format("error ({}): {}", to_string(e.code()), e.what());
  return obs;
}

bool finite_call(const ToolCall& call) {
  if (const auto* z = std::get_if<ZoomIn>(&call.params)) {
    return std::isfinite(z->bbox.x_min) && std::isfinite(z->bbox.y_min) && std::isfinite(z->bbox.x_max) &&
           std::isfinite(z->bbox.y_max);
  }
  if (const auto* v = std::get_if<RenderView>(&call.params)) {
    const CameraPose& p = v->pose;
    return std::isfinite(p.position.x) && std::isfinite(p.position.y) && std::isfinite(p.position.z) &&
           std::isfinite(p.yaw) && std::isfinite(p.pitch) && std::isfinite(p.roll) && std::isfinite(p.fov);
  }
  return true;
}

std::string join_hashes(const std::vector<std::string>& hashes) {
  std::string out;
  for (const auto& h : hashes) out += (out.empty() ? "" : ",") + h;
  return out;
}

}  // namespace

Observation Environment::observe_zoom(const Scene& scene, const ZoomIn& z) const {
  if (z.floor < 0 || z.floor >= scene.floor_count()) {
    throw Error(ErrorCode::InvalidArgument,
                fmt::format("floor index {} out of range [0, {})", z.floor, scene.floor_count()));
  }
  const ClampedBBox c = clamp_zoom(z.bbox, cfg_.bev_resolution);
  Observation obs;
  obs.images.push_back(render_zoom(scene, z.floor, z.bbox, cfg_.zoom_resolution, cfg_.bev_resolution));
  obs.clamped = c.clamped;
  obs.note = fmt::format("zoom_in floor {} bbox [{:.1f}, {:.1f}, {:.1f}, {:.1f}]{} at {}x{} px", floor_number(z.floor),
                         c.box.x_min, c.box.y_min, c.box.x_max, c.box.y_max, c.clamped ? " (clamped)" : "",
                         cfg_.zoom_resolution, cfg_.zoom_resolution);
  return obs;
}

Observation Environment::observe_view(const Scene& scene, const RenderView& v) const {
  CameraPose pose = v.pose;
  pose.fov = cfg_.fov;
  Observation obs;
  obs.images.push_back(render_view(scene, pose, cfg_.view_resolution));
  obs.note = fmt::format("render_view at ({:.2f}, {:.2f}, {:.2f}) yaw {:.1f} pitch {:.1f} on floor {}", pose.position.x,
                         pose.position.y, pose.position.z, pose.yaw, pose.pitch,
                         floor_number(floor_of_position(scene, pose.position)));
  return obs;
}

Observation Environment::step(EpisodeState& state, const ToolCall& call) const {
  if (state.terminated) throw Error(ErrorCode::ProtocolError, "episode already terminated");
  if (!finite_call(call)) throw Error(ErrorCode::ProtocolError, "tool call parameters must be finite");
  const Scene& s = scene(state.scene_id);
  const QAItem& item = qa(state.qa_id);

  ToolCall recorded = call;
  recorded.step_index = state.t;
  Observation obs;
  std::string digest;

  if (call.kind() == ToolKind::Answer) {
    const std::string& text = std::get<Answer>(call.params).text;
    state.answer = text;
    state.correct = match_answer(text, item);
    state.termination = Termination::Answered;
    obs.note = "answer received";
  } else if (state.tool_calls() >= cfg_.step_budget) {
    recorded.params = Answer{""};
    state.answer = "";
    state.correct = false;
    state.termination = Termination::ForcedTermination;
    obs.note = fmt::format("step budget of {} tool calls exhausted; episode ended without an answer", cfg_.step_budget);
  } else {
    try {
      obs = call.kind() == ToolKind::ZoomIn ? observe_zoom(s, std::get<ZoomIn>(call.params))
                                            : observe_view(s, std::get<RenderView>(call.params));
      for (const auto& img : obs.images) obs.hashes.push_back(content_hash(img));
      digest = join_hashes(obs.hashes);
    } catch (const Error& e) {
      obs = error_observation(e);
      digest = fmt::format("error:{}", to_string(e.code()));
    }
  }

  if (state.termination != Termination::None) {
    state.terminated = true;
    obs.terminal = true;
  }
  state.history.push_back(HistoryEntry{recorded, digest, !obs.error});
  state.t = static_cast<int>(state.history.size());
  state.current = obs;
  return obs;
}

std::vector<std::string> replay_hashes(const Environment& env, const Trajectory& traj) {
  EpisodeState state = env.start_episode(traj.scene_id, traj.qa_id, traj.episode_id);
  for (const auto& call : traj.calls) {
    if (state.terminated) break;
    env.step(state, call);
  }
  return to_trajectory(state).observation_hashes;
}

}  // namespace arena
