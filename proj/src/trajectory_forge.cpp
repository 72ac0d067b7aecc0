#include "spatial_arena/trajectory_forge.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/format.h>
#include <atomic>
#include <map>
#include <mutex>
#include <set>
#include <thread>

#include "spatial_arena/error.hpp"

namespace arena {

std::string_view to_string(ErrorType t) {
  switch (t) {
    case ErrorType::WrongPosition: return "wrong_position";
    case ErrorType::WrongBBox: return "wrong_bbox";
    case ErrorType::WrongCamera: return "wrong_camera";
  }
  return "?";
}

std::string_view to_string(CorrectionMode m) { return m == CorrectionMode::Progressive ? "progressive" : "reset"; }

std::string_view to_string(TurnRole r) {
  switch (r) {
    case TurnRole::Clean: return "clean";
    case TurnRole::Error: return "error";
    case TurnRole::Adjust: return "adjust";
    case TurnRole::Abandon: return "abandon";
    case TurnRole::Answer: return "answer";
  }
  return "?";
}

ErrorType parse_error_type(std::string_view s) {
  for (ErrorType t : kAllErrorTypes) {
    if (to_string(t) == s) return t;
  }
  throw Error(ErrorCode::InvalidArgument, fmt::format("unknown error type '{}'", s));
}

CorrectionMode parse_correction_mode(std::string_view s) {
  if (s == "progressive") return CorrectionMode::Progressive;
  if (s == "reset") return CorrectionMode::Reset;
  throw Error(ErrorCode::InvalidArgument, fmt::format("unknown correction mode '{}'", s));
}

namespace {

TurnRole parse_turn_role(std::string_view s) {
  for (TurnRole r : {TurnRole::Clean, TurnRole::Error, TurnRole::Adjust, TurnRole::Abandon, TurnRole::Answer}) {
    if (to_string(r) == s) return r;
  }
  throw Error(ErrorCode::InvalidArgument, fmt::format("unknown turn role '{}'", s));
}

}  // namespace

std::vector<ToolCall> TrainingRecord::calls() const {
  std::vector<ToolCall> out;
  for (const auto& t : turns) {
    if (t.call) out.push_back(*t.call);
  }
  return out;
}

namespace {

double q4(double x) {
  const double r = std::round(x * 1e4) / 1e4;
  return r == 0.0 ? 0.0 : r;
}

BBox2D q4(const BBox2D& b) { return {q4(b.x_min), q4(b.y_min), q4(b.x_max), q4(b.y_max)}; }

CameraPose q4(CameraPose p) {
  p.position = {q4(p.position.x), q4(p.position.y), q4(p.position.z)};
  p.yaw = q4(wrap_yaw(p.yaw));
  if (p.yaw >= 180.0) p.yaw = -180.0;
  p.pitch = q4(p.pitch);
  return p;
}

ToolCall zoom_call(int floor, const BBox2D& b) { return ToolCall{ZoomIn{floor, b}, 0}; }
ToolCall view_call(const CameraPose& p) { return ToolCall{RenderView{p}, 0}; }

std::string join_names(const std::vector<std::string>& names) {
  if (names.empty()) return "nothing recognizable";
  if (names.size() == 1) return names[0];
  std::string out;
  for (std::size_t i = 0; i + 1 < names.size(); ++i) out += (i ? ", " : "") + names[i];
  return out + " and " + names.back();
}

struct Seen {
  std::string hash;
  std::string note;
  std::vector<int> px;
};

// Builds one record for one QA item; holds the render settings and the
// accumulated turns.
class Forge {
 public:
  Forge(const Environment& env, const QAItem& qa, Rng& rng, const ForgeOptions& opts)
      : env_(env), scene_(env.scene(qa.scene_id)), qa_(qa), rng_(rng), opts_(opts) {
    const double s = static_cast<double>(env.config().bev_resolution) / qa.bev_resolution;
    gt_bbox_ = q4(BBox2D{qa.gt_bbox.x_min * s, qa.gt_bbox.y_min * s, qa.gt_bbox.x_max * s, qa.gt_bbox.y_max * s});
    gt_pose_ = qa.gt_pose;
    gt_pose_.fov = env.config().fov;
    record_.record_id = qa.qa_id + "-t";
    record_.qa_id = qa.qa_id;
    record_.scene_id = qa.scene_id;
    record_.question = qa.question;
    record_.final_answer = qa.answer;
  }

  TrainingRecord clean() {
    const auto [z, v] = clean_calls();
    push_zoom(TurnRole::Clean, z, opening());
    push_view(TurnRole::Clean, v, view_purpose());
    finish();
    return std::move(record_);
  }

  TrainingRecord injected(const InjectionRequest& req) {
    Injection& inj = record_.injection;
    inj.injected = true;
    inj.error_type = req.error_type ? *req.error_type
                                    : kAllErrorTypes[rng_.weighted(opts_.error_type_weights)];
    inj.mode = req.mode ? *req.mode
                        : (rng_.bernoulli(opts_.progressive_share) ? CorrectionMode::Progressive : CorrectionMode::Reset);
    const int n = req.adjustments ? *req.adjustments : static_cast<int>(rng_.uniform_int(2, 3));
    if (n < 2 || n > 3) throw Error(ErrorCode::InvalidArgument, "progressive corrections take 2 or 3 adjustments");
    inj.adjustment_count = inj.mode == CorrectionMode::Progressive ? n : 0;
    const auto [z, v] = clean_calls();

    if (inj.error_type == ErrorType::WrongBBox) {
      const BBox2D wrong = wrong_bbox();
      push_zoom(TurnRole::Error, wrong, opening());
      if (inj.mode == CorrectionMode::Progressive) {
        for (int k = 1; k <= n; ++k) {
          const double t = static_cast<double>(k) / n;
          const BBox2D b = k == n ? gt_bbox_
                                  : q4(BBox2D{std::lerp(wrong.x_min, gt_bbox_.x_min, t),
                                              std::lerp(wrong.y_min, gt_bbox_.y_min, t),
                                              std::lerp(wrong.x_max, gt_bbox_.x_max, t),
                                              std::lerp(wrong.y_max, gt_bbox_.y_max, t)});
          push_zoom(TurnRole::Adjust, b, bbox_adjust_text(k, n));
        }
        push_view(TurnRole::Clean, v, view_purpose());
      } else {
        reset_then(z, v);
      }
    } else {
      const CameraPose wrong = inj.error_type == ErrorType::WrongPosition ? wrong_position() : wrong_camera();
      push_zoom(TurnRole::Clean, z, opening());
      push_view(TurnRole::Error, wrong, view_purpose());
      if (inj.mode == CorrectionMode::Progressive) {
        for (int k = 1; k <= n; ++k) {
          const double t = static_cast<double>(k) / n;
          CameraPose p = k == n ? gt_pose_ : interpolate(wrong, gt_pose_, t, inj.error_type);
          push_view(TurnRole::Adjust, p, view_adjust_text(inj.error_type, k, n));
        }
      } else {
        reset_then(z, v);
      }
    }
    finish();
    return std::move(record_);
  }

 private:
  // Clean zoom and view, jittered, re-drawn until the observations still
  // support the ground-truth answer; falls back to the exact generation calls.
  std::pair<BBox2D, CameraPose> clean_calls() {
    if (opts_.zero_jitter) return {gt_bbox_, gt_pose_};
    const double diag = std::hypot(gt_bbox_.width(), gt_bbox_.height());
    const double j = opts_.bbox_jitter * diag / std::numbers::sqrt2;
    const double a = opts_.angle_jitter_deg / std::numbers::sqrt2;
    for (int attempt = 0; attempt < 8; ++attempt) {
      BBox2D b = q4(BBox2D{gt_bbox_.x_min + rng_.uniform(-j, j), gt_bbox_.y_min + rng_.uniform(-j, j),
                           gt_bbox_.x_max + rng_.uniform(-j, j), gt_bbox_.y_max + rng_.uniform(-j, j)});
      CameraPose p = gt_pose_;
      p.yaw += rng_.uniform(-a, a);
      p.pitch = std::clamp(p.pitch + rng_.uniform(-a, a), -89.0, 89.0);
      p = q4(p);
      if (!b.valid() || b.area() < 16.0) continue;
      const Seen sz = observe(zoom_call(qa_.gt_floor, b));
      const Seen sv = observe(view_call(p));
      if (sz.px.empty() || sv.px.empty()) continue;
      if (match_answer(read_answer_from(scene_, qa_, sz.px, sv.px), qa_)) return {b, p};
    }
    return {gt_bbox_, gt_pose_};
  }

  Seen observe(const ToolCall& call) {
    const std::string key = canonical_dump(to_json(call));
    if (auto it = cache_.find(key); it != cache_.end()) return it->second;
    Seen s = render(call);
    cache_.emplace(key, s);
    return s;
  }

  Seen render(const ToolCall& call) const {
    const EnvConfig& cfg = env_.config();
    Seen s;
    try {
      Raster r;
      if (const auto* z = std::get_if<ZoomIn>(&call.params)) {
        r = render_zoom_raster(scene_, z->floor, z->bbox, cfg.zoom_resolution, cfg.bev_resolution);
        s.note = fmt::format("Zoomed region of floor {}.", floor_number(z->floor));
      } else {
        CameraPose p = std::get<RenderView>(call.params).pose;
        p.fov = cfg.fov;
        r = render_view_raster(scene_, p, cfg.view_resolution);
        s.note = fmt::format("First-person view from ({:.2f}, {:.2f}, {:.2f}).", p.position.x, p.position.y,
                             p.position.z);
      }
      s.hash = content_hash(r.image);
      s.px = r.ids.histogram(scene_.objects.size());
    } catch (const Error& e) {
      s.hash = fmt::format("error:{}", to_string(e.code()));
      s.note = e.what();
    }
    return s;
  }

  void push(TurnRole role, ToolCall call, std::string purpose) {
    const Seen s = observe(call);
    Turn t;
    t.role = role;
    t.reasoning = pending_ + purpose;
    call.step_index = step_++;
    t.call = std::move(call);
    t.observation_hash = s.hash;
    t.observation_note = s.note;
    record_.turns.push_back(std::move(t));
    last_ = s;
    last_kind_ = record_.turns.back().call->kind();
    pending_ = describe(s) + " ";
  }

  void push_zoom(TurnRole role, const BBox2D& b, std::string purpose) {
    push(role, zoom_call(qa_.gt_floor, b), std::move(purpose));
  }
  void push_view(TurnRole role, const CameraPose& p, std::string purpose) { push(role, view_call(p), std::move(purpose)); }

  void reset_then(const BBox2D& z, const CameraPose& v) {
    Turn t;
    t.role = TurnRole::Abandon;
    static constexpr std::string_view lines[] = {
        "This is not getting me closer to the {}. I will drop this approach and start again from the bird's-eye view.",
        "I have been searching in the wrong place for the {}. Let me abandon this path and begin again from the overview.",
        "This strategy is not working for finding the {}. Starting over from the floor plan."};
    t.reasoning = pending_ + fmt::format(fmt::runtime(lines[rng_.uniform_int(0, 2)]), target_phrase());
    record_.turns.push_back(std::move(t));
    pending_.clear();
    push_zoom(TurnRole::Clean, z, opening());
    push_view(TurnRole::Clean, v, view_purpose());
  }

  void finish() {
    Turn t;
    t.role = TurnRole::Answer;
    t.reasoning = pending_ + fmt::format("So the answer is {}.", qa_.answer);
    t.call = ToolCall{Answer{qa_.answer}, step_++};
    record_.turns.push_back(std::move(t));
  }

  std::string target_phrase() const {
    const Referent& r = qa_.referent;
    if (qa_.qtype == QuestionType::Counting) {
      return fmt::format("{}s on floor {}", r.class_name, floor_number(*r.floor));
    }
    if (qa_.qtype == QuestionType::Position) return fmt::format("{} {}", to_string(*r.color), r.class_name);
    return fmt::format("{} in the {} on floor {}", r.class_name, display_name(*r.room), floor_number(*r.floor));
  }

  std::string opening() {
    static constexpr std::string_view lines[] = {
        "I need to find the {0}. The bird's-eye view of floor {1} looks like the right place, so I will zoom in there.",
        "The question is about the {0}. I will zoom into the matching part of floor {1} first.",
        "To locate the {0}, I start with a closer look at a region of floor {1}."};
    return fmt::format(fmt::runtime(lines[rng_.uniform_int(0, 2)]), target_phrase(), floor_number(qa_.gt_floor));
  }

  std::string view_purpose() {
    static constexpr std::string_view lines[] = {
        "Now I will render a close-up view toward it to read the details.",
        "Next, a first-person view from inside the room should show it clearly.",
        "I will place the camera in the room and look toward it."};
    return std::string(lines[rng_.uniform_int(0, 2)]);
  }

  std::string bbox_adjust_text(int k, int n) const {
    if (k == n) return "Moving the box the rest of the way onto the target region.";
    return fmt::format("That region does not contain the {}. I will shift the box toward it (adjustment {} of {}).",
                       target_phrase(), k, n);
  }

  std::string view_adjust_text(ErrorType type, int k, int n) const {
    const char* what = type == ErrorType::WrongPosition ? "The camera is in the wrong place"
                                                        : "The camera is facing the wrong way";
    if (k == n) return "One more correction should bring it fully into view.";
    return fmt::format("{}; the {} is not in view. Adjusting (step {} of {}).", what, target_phrase(), k, n);
  }

  std::string describe(const Seen& s) const {
    if (s.px.empty()) return fmt::format("That call failed ({}).", s.note);
    std::vector<std::pair<int, std::size_t>> order;
    for (std::size_t i = 0; i < s.px.size(); ++i) {
      if (s.px[i] > 0) order.emplace_back(-s.px[i], i);
    }
    std::ranges::sort(order);
    std::vector<std::string> names;
    std::set<std::string> used;
    for (const auto& [_, i] : order) {
      const SceneObject& o = scene_.objects[i];
      const std::string name = fmt::format("a {} {}", to_string(o.color), o.class_name);
      if (used.insert(name).second) names.push_back(name);
      if (names.size() == 4) break;
    }
    const std::string answer = read_answer_from(scene_, qa_, s.px, std::vector<int>(s.px.size(), 0));
    const bool found = match_answer(answer, qa_);
    const char* where = last_kind_ == ToolKind::ZoomIn ? "The zoomed region shows" : "The view shows";
    if (qa_.qtype == QuestionType::Counting) {
      return fmt::format("{} {}. I count {} {}s here.", where, join_names(names), answer.empty() ? "0" : answer,
                         qa_.referent.class_name);
    }
    if (found) return fmt::format("{} {}. The {} is visible.", where, join_names(names), target_phrase());
    return fmt::format("{} {}. I cannot make out the {} yet.", where, join_names(names), target_phrase());
  }

  BBox2D wrong_bbox() {
    const double res = env_.config().bev_resolution;
    const Vec2 gc = gt_bbox_.center();
    for (int attempt = 0; attempt < 64; ++attempt) {
      const double w = std::clamp(gt_bbox_.width() * rng_.uniform(0.5, 1.0), 0.1 * res, 0.6 * res);
      const double h = std::clamp(gt_bbox_.height() * rng_.uniform(0.5, 1.0), 0.1 * res, 0.6 * res);
      const double x0 = std::round(rng_.uniform(0.0, res - w));
      const double y0 = std::round(rng_.uniform(0.0, res - h));
      const BBox2D b{x0, y0, std::round(x0 + w), std::round(y0 + h)};
      if (iou(b, gt_bbox_) < 0.1 && norm(b.center() - gc) / (res * std::numbers::sqrt2) >= 0.1) return b;
    }
    // Corner box farthest from the target.
    const double s = 0.15 * res;
    const double x0 = gc.x < res / 2 ? res - s : 0.0;
    const double y0 = gc.y < res / 2 ? res - s : 0.0;
    return BBox2D{x0, y0, x0 + s, y0 + s};
  }

  CameraPose wrong_position() {
    CameraPose p = gt_pose_;
    const int floors = scene_.floor_count();
    const int f = floor_of_position(scene_, gt_pose_.position);
    if (floors > 1 && rng_.bernoulli(0.5)) {
      int other = static_cast<int>(rng_.uniform_int(0, floors - 2));
      if (other >= f) ++other;
      p.position.z += (other - f) * kFloorHeight;
      return q4(p);
    }
    const Rect area = scene_.floors[static_cast<std::size_t>(f)].footprint.inset(0.3);
    const Vec2 gt{gt_pose_.position.x, gt_pose_.position.y};
    for (int attempt = 0; attempt < 64; ++attempt) {
      const Vec2 xy{rng_.uniform(area.x0, area.x1), rng_.uniform(area.y0, area.y1)};
      if (norm(xy - gt) >= 3.2) {
        p.position.x = xy.x;
        p.position.y = xy.y;
        return q4(p);
      }
    }
    p.position.x = gt.x - area.x0 > area.x1 - gt.x ? area.x0 : area.x1;
    p.position.y = gt.y - area.y0 > area.y1 - gt.y ? area.y0 : area.y1;
    return q4(p);
  }

  CameraPose wrong_camera() {
    CameraPose p = gt_pose_;
    for (int attempt = 0; attempt < 16; ++attempt) {
      const double offset = rng_.uniform(60.5, 150.0) * (rng_.bernoulli(0.5) ? 1.0 : -1.0);
      p = gt_pose_;
      p.yaw += offset;
      if (attempt >= 8) p.pitch = 0.0;
      p = q4(p);
      if (view_angle_between(p.yaw, p.pitch, gt_pose_.yaw, gt_pose_.pitch) >= 60.0) return p;
    }
    p = gt_pose_;
    p.yaw += 120.0;
    p.pitch = 0.0;
    return q4(p);
  }

  static CameraPose interpolate(const CameraPose& from, const CameraPose& to, double t, ErrorType type) {
    CameraPose p = to;
    if (type == ErrorType::WrongPosition) {
      p.position = from.position + (to.position - from.position) * t;
      return q4(p);
    }
    // Spherical interpolation of the view direction.
    const Vec3 a = view_direction(from.yaw, from.pitch);
    const Vec3 b = view_direction(to.yaw, to.pitch);
    const double omega = std::acos(std::clamp(dot(a, b), -1.0, 1.0));
    const double so = std::sin(omega);
    const Vec3 v = so < 1e-9 ? b : a * (std::sin((1.0 - t) * omega) / so) + b * (std::sin(t * omega) / so);
    p.yaw = rad2deg(std::atan2(v.y, v.x));
    p.pitch = rad2deg(std::asin(std::clamp(v.z / norm(v), -1.0, 1.0)));
    return q4(p);
  }

  const Environment& env_;
  const Scene& scene_;
  const QAItem& qa_;
  Rng& rng_;
  ForgeOptions opts_;
  BBox2D gt_bbox_;
  CameraPose gt_pose_;
  TrainingRecord record_;
  std::string pending_;
  Seen last_;
  ToolKind last_kind_ = ToolKind::ZoomIn;
  int step_ = 0;
  std::map<std::string, Seen> cache_;
};

}  // namespace

TrainingRecord synth_clean(const Environment& env, const QAItem& qa, Rng& rng, const ForgeOptions& opts) {
  return Forge(env, qa, rng, opts).clean();
}

TrainingRecord synth_injected(const Environment& env, const QAItem& qa, Rng& rng, const ForgeOptions& opts,
                              const InjectionRequest& req) {
  return Forge(env, qa, rng, opts).injected(req);
}

std::vector<TrainingRecord> synth_corpus(const Environment& env, const std::vector<QAItem>& items, std::uint64_t seed,
                                         const ForgeOptions& opts) {
  if (items.empty()) throw Error(ErrorCode::InvalidArgument, "empty QA set");
  std::vector<TrainingRecord> out(items.size());
  auto one = [&](std::size_t i) {
    const QAItem& qa = items[i];
    Rng rng(derive_seed(seed, qa.qa_id));
    out[i] = rng.bernoulli(opts.inject_rate) ? synth_injected(env, qa, rng, opts) : synth_clean(env, qa, rng, opts);
  };
  const int workers = std::max(1, opts.workers);
  if (workers == 1) {
    for (std::size_t i = 0; i < items.size(); ++i) one(i);
    return out;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mu;
  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < items.size(); i = next++) {
        try {
          one(i);
        } catch (...) {
          std::lock_guard lock(failure_mu);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
  return out;
}

CorpusStats corpus_stats(const std::vector<TrainingRecord>& records) {
  CorpusStats s;
  s.total = static_cast<int>(records.size());
  for (const auto& r : records) {
    if (!r.injection.injected) continue;
    ++s.injected;
    ++(r.injection.mode == CorrectionMode::Progressive ? s.progressive : s.reset);
    ++s.error_types[static_cast<std::size_t>(r.injection.error_type)];
  }
  return s;
}

Json to_json(const CorpusStats& s) {
  Json types = Json::object();
  for (ErrorType t : kAllErrorTypes) {
    const int n = s.error_types[static_cast<std::size_t>(t)];
    types[std::string(to_string(t))] = Json{{"count", n}, {"fraction", s.injected ? static_cast<double>(n) / s.injected : 0.0}};
  }
  return Json{{"total", s.total},
              {"injected", s.injected},
              {"injected_fraction", s.injected_fraction()},
              {"progressive", s.progressive},
              {"reset", s.reset},
              {"progressive_fraction", s.progressive_fraction()},
              {"error_types", types}};
}

namespace {

constexpr std::string_view kSystemPrompt =
    "You explore a multi-floor house to answer a question. Tools: zoom_in(floor, bbox) re-renders a region "
    "of a floor's bird's-eye view given in pixel coordinates; render_view(pos, theta) renders a first-person "
    "view from a 3D position with yaw, pitch and roll in degrees; answer(text) ends the episode.";

Json arguments(const ToolCall& call) {
  Json j = to_json(call);
  j.erase("name");
  return j;
}

}  // namespace

Json to_json(const TrainingRecord& r) {
  Json turns = Json::array();
  Json messages = Json::array();
  messages.push_back(Json{{"role", "system"}, {"content", kSystemPrompt}});
  messages.push_back(Json{{"role", "user"}, {"content", r.question}});
  for (const auto& t : r.turns) {
    Json turn{{"role", to_string(t.role)}, {"reasoning", t.reasoning}};
    turn["call"] = t.call ? to_json(*t.call) : Json();
    turn["obs_hash"] = t.observation_hash;
    turn["obs_note"] = t.observation_note;
    turns.push_back(std::move(turn));

    Json msg{{"role", "assistant"}, {"content", t.reasoning}};
    if (t.call) {
      msg["tool_calls"] = Json::array({Json{{"type", "function"},
                                            {"function", Json{{"name", to_string(t.call->kind())},
                                                              {"arguments", arguments(*t.call)}}}}});
    }
    messages.push_back(std::move(msg));
    if (t.call && t.call->kind() != ToolKind::Answer) {
      messages.push_back(Json{{"role", "tool"},
                              {"name", to_string(t.call->kind())},
                              {"content", t.observation_note},
                              {"image", t.observation_hash}});
    }
  }
  const Injection& inj = r.injection;
  Json injection{{"injected", inj.injected}};
  injection["error_type"] = inj.injected ? Json(to_string(inj.error_type)) : Json();
  injection["correction_mode"] = inj.injected ? Json(to_string(inj.mode)) : Json();
  injection["adjustment_count"] = inj.adjustment_count;
  return Json{{"record_id", r.record_id}, {"qa_id", r.qa_id},   {"scene_id", r.scene_id},
              {"question", r.question},   {"answer", r.final_answer}, {"injection", injection},
              {"turns", turns},           {"messages", messages}};
}

TrainingRecord record_from_json(const Json& j) {
  try {
    TrainingRecord r;
    r.record_id = j.at("record_id").get<std::string>();
    r.qa_id = j.at("qa_id").get<std::string>();
    r.scene_id = j.at("scene_id").get<std::string>();
    r.question = j.at("question").get<std::string>();
    r.final_answer = j.at("answer").get<std::string>();
    const Json& inj = j.at("injection");
    r.injection.injected = inj.at("injected").get<bool>();
    if (r.injection.injected) {
      r.injection.error_type = parse_error_type(inj.at("error_type").get<std::string>());
      r.injection.mode = parse_correction_mode(inj.at("correction_mode").get<std::string>());
    }
    r.injection.adjustment_count = inj.value("adjustment_count", 0);
    int k = 0;
    for (const auto& tj : j.at("turns")) {
      Turn t;
      t.role = parse_turn_role(tj.at("role").get<std::string>());
      t.reasoning = tj.at("reasoning").get<std::string>();
      if (!tj.at("call").is_null()) {
        t.call = tool_call_from_json(tj["call"]);
        t.call->step_index = k++;
      }
      t.observation_hash = tj.value("obs_hash", "");
      t.observation_note = tj.value("obs_note", "");
      r.turns.push_back(std::move(t));
    }
    return r;
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::InvalidArgument, fmt::format("bad training record: {}", e.what()));
  }
}

}  // namespace arena
