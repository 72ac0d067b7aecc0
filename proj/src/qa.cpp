#include "spatial_arena/qa.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fmt/format.h>
#include <set>

#include "spatial_arena/error.hpp"
#include "spatial_arena/rng.hpp"

namespace arena {

std::string_view to_string(QuestionType t) {
  switch (t) {
    case QuestionType::Position: return "position";
    case QuestionType::Color: return "color";
    case QuestionType::Material: return "material";
    case QuestionType::Counting: return "counting";
    case QuestionType::Shape: return "shape";
    case QuestionType::State: return "state";
  }
  return "?";
}

QuestionType parse_question_type(std::string_view s) {
  for (QuestionType t : kAllQuestionTypes) {
    if (to_string(t) == s) return t;
  }
  // Prose sometimes calls Position questions "relation" questions.
  if (s == "relation") return QuestionType::Position;
  throw Error(ErrorCode::InvalidArgument, fmt::format("unknown question type '{}'", s));
}

ObjectFilter Referent::to_filter() const {
  ObjectFilter f;
  f.class_name = class_name;
  f.floor = floor;
  f.room_category = room;
  f.color = color;
  return f;
}

std::string position_phrase(RoomCategory room, int floor_index) {
  return fmt::format("in the {} on floor {}", display_name(room), floor_number(floor_index));
}

std::string attribute_answer(const Scene& scene, const SceneObject& obj, QuestionType t) {
  switch (t) {
    case QuestionType::Position: {
      const Room* room = scene.find_room(obj.room_id);
      return room ? position_phrase(room->category, obj.floor_index) : std::string();
    }
    case QuestionType::Color: return std::string(to_string(obj.color));
    case QuestionType::Material: return std::string(to_string(obj.material));
    case QuestionType::Shape: return std::string(to_string(obj.shape));
    case QuestionType::State: return std::string(to_string(obj.state));
    case QuestionType::Counting: break;
  }
  throw Error(ErrorCode::InvalidArgument, "counting has no per-object attribute");
}

namespace {

bool singular(QuestionType t) { return t != QuestionType::Counting; }

}  // namespace

std::optional<std::string> oracle_answer(const Scene& scene, const QAItem& qa) {
  const auto matches = query_objects(scene, qa.referent.to_filter());
  if (qa.qtype == QuestionType::Counting) return std::to_string(matches.size());
  if (matches.size() != 1) return std::nullopt;
  return attribute_answer(scene, *matches.front(), qa.qtype);
}

Json to_json(const QAItem& qa) {
  Json ref{{"class", qa.referent.class_name}};
  if (qa.referent.floor) ref["floor"] = *qa.referent.floor;
  if (qa.referent.room) ref["room"] = to_string(*qa.referent.room);
  if (qa.referent.color) ref["color"] = to_string(*qa.referent.color);
  const CameraPose& p = qa.gt_pose;
  return Json{{"qa_id", qa.qa_id},
              {"scene_id", qa.scene_id},
              {"question", qa.question},
              {"qtype", to_string(qa.qtype)},
              {"answer", qa.answer},
              {"referent", std::move(ref)},
              {"gt_floor", qa.gt_floor},
              {"gt_bbox", to_json(qa.gt_bbox)},
              {"bev_resolution", qa.bev_resolution},
              {"gt_pose", Json{{"pos", to_json(p.position)},
                               {"theta", Json::array({p.yaw, p.pitch, p.roll})},
                               {"fov", p.fov}}},
              {"targets", qa.target_ids}};
}

QAItem qa_from_json(const Json& j) {
  try {
    QAItem qa;
    qa.qa_id = j.at("qa_id").get<std::string>();
    qa.scene_id = j.at("scene_id").get<std::string>();
    qa.question = j.at("question").get<std::string>();
    qa.qtype = parse_question_type(j.at("qtype").get<std::string>());
    qa.answer = j.at("answer").get<std::string>();
    const Json& ref = j.at("referent");
    qa.referent.class_name = ref.at("class").get<std::string>();
    if (ref.contains("floor")) qa.referent.floor = ref["floor"].get<int>();
    if (ref.contains("room")) qa.referent.room = parse_room_category(ref["room"].get<std::string>());
    if (ref.contains("color")) qa.referent.color = parse_color(ref["color"].get<std::string>());
    qa.gt_floor = j.at("gt_floor").get<int>();
    qa.gt_bbox = bbox_from_json(j.at("gt_bbox"));
    qa.bev_resolution = j.value("bev_resolution", kDefaultBevResolution);
    const Json& pose = j.at("gt_pose");
    qa.gt_pose.position = vec3_from_json(pose.at("pos"));
    const Vec3 theta = vec3_from_json(pose.at("theta"));
    qa.gt_pose.yaw = theta.x;
    qa.gt_pose.pitch = theta.y;
    qa.gt_pose.roll = theta.z;
    qa.gt_pose.fov = pose.value("fov", kDefaultFov);
    qa.target_ids = j.at("targets").get<std::vector<std::string>>();
    return qa;
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::InvalidArgument, fmt::format("bad QA item: {}", e.what()));
  }
}

namespace {

double quantize(double x) { return std::round(x * 1e4) / 1e4; }

std::string plural(std::string_view noun) {
  const std::string s(noun);
  if (s == "shelf") return "shelves";
  auto ends = [&](std::string_view suf) { return s.size() >= suf.size() && s.ends_with(suf); };
  if (ends("x") || ends("ch") || ends("sh") || ends("s")) return s + "es";
  return s + "s";
}

std::string fill(std::string_view tmpl, const std::vector<std::pair<std::string, std::string>>& slots) {
  std::string out(tmpl);
  for (const auto& [key, value] : slots) {
    const std::string token = "{" + key + "}";
    for (std::size_t pos = out.find(token); pos != std::string::npos; pos = out.find(token, pos + value.size())) {
      out.replace(pos, token.size(), value);
    }
  }
  return out;
}

const std::vector<std::string_view>& templates(QuestionType t) {
  static const std::vector<std::string_view> position = {
      "Where is the {color} {cls}?",
      "In which room can the {color} {cls} be found?",
      "Which room and floor contain the {color} {cls}?",
      "Locate the {color} {cls}. Which room is it in?",
      "Where in the house is the {color} {cls} located?",
      "On which floor and in which room is the {color} {cls}?",
      "Find the {color} {cls}. Where is it?"};
  static const std::vector<std::string_view> color = {
      "What color is the {cls} in the {room} on {floor}?",
      "What is the color of the {cls} in the {room} on {floor}?",
      "Which color does the {cls} in the {room} on {floor} have?",
      "Look at the {cls} in the {room} on {floor}. What color is it?",
      "In the {room} on {floor}, what color is the {cls}?",
      "Tell me the color of the {cls} located in the {room} on {floor}."};
  static const std::vector<std::string_view> material = {
      "What material is the {cls} in the {room} on {floor} made of?",
      "What is the {cls} in the {room} on {floor} made of?",
      "Which material is used for the {cls} in the {room} on {floor}?",
      "In the {room} on {floor}, what material is the {cls}?",
      "Identify the material of the {cls} in the {room} on {floor}.",
      "The {room} on {floor} has a {cls}. What is it made of?"};
  static const std::vector<std::string_view> counting = {
      "How many {pl} are there on {floor}?",
      "Count the {pl} on {floor}.",
      "What is the number of {pl} on {floor}?",
      "How many {pl} can be found on {floor}?",
      "On {floor}, how many {pl} are there?",
      "How many {pl} does {floor} have?"};
  static const std::vector<std::string_view> shape = {
      "What shape is the {cls} in the {room} on {floor}?",
      "What is the shape of the {cls} in the {room} on {floor}?",
      "Describe the shape of the {cls} in the {room} on {floor}.",
      "In the {room} on {floor}, what shape does the {cls} have?",
      "Which shape best describes the {cls} in the {room} on {floor}?",
      "Look at the {cls} in the {room} on {floor}. What shape is it?"};
  static const std::vector<std::string_view> state = {
      "Is the {cls} in the {room} on {floor} {a} or {b}?",
      "What is the state of the {cls} in the {room} on {floor}: {a} or {b}?",
      "In the {room} on {floor}, is the {cls} {a} or {b}?",
      "Check the {cls} in the {room} on {floor}. Is it {a} or {b}?",
      "Tell me whether the {cls} in the {room} on {floor} is {a} or {b}.",
      "The {room} on {floor} has a {cls}. Is it {a} or {b}?"};
  switch (t) {
    case QuestionType::Position: return position;
    case QuestionType::Color: return color;
    case QuestionType::Material: return material;
    case QuestionType::Counting: return counting;
    case QuestionType::Shape: return shape;
    case QuestionType::State: return state;
  }
  return color;
}

class QAGenerator {
 public:
  QAGenerator(const Scene& scene, const QAOptions& opts) : scene_(scene), opts_(opts) {
    for (int f = 0; f < scene.floor_count(); ++f) geometry_.emplace_back(scene, f);
    for (std::size_t i = 0; i < scene.objects.size(); ++i) index_[scene.objects[i].object_id] = static_cast<std::int32_t>(i);
  }

  // A question the scene can support, before a camera pose is found for it.
  struct Candidate {
    const Room* room = nullptr;
    int floor = 0;
    Referent referent;
    std::vector<const SceneObject*> targets;
  };

  std::vector<Candidate> candidates(QuestionType qtype) const {
    std::vector<Candidate> out;
    for (const auto& fl : scene_.floors) {
      for (const auto& room : fl.rooms) {
        const auto in_room = query_objects(scene_, ObjectFilter{.room_id = room.room_id});
        if (qtype == QuestionType::Counting) {
          std::set<std::string> classes;
          for (const auto* o : in_room) classes.insert(o->class_name);
          for (const auto& cls : classes) {
            const auto all = query_objects(scene_, ObjectFilter{.class_name = cls, .floor = fl.index});
            const bool contained =
                std::ranges::all_of(all, [&](const SceneObject* o) { return o->room_id == room.room_id; });
            if (contained && all.size() <= 6) out.push_back({&room, fl.index, Referent{cls, fl.index, std::nullopt, std::nullopt}, all});
          }
          continue;
        }
        for (const auto* o : in_room) {
          if (qtype == QuestionType::State && o->state == ObjectState::None) continue;
          const Referent ref = referent_for(*o, qtype, room);
          if (query_objects(scene_, ref.to_filter()).size() == 1) out.push_back({&room, fl.index, ref, {o}});
        }
      }
    }
    return out;
  }

  std::optional<QAItem> attempt(QuestionType qtype, const Candidate& c, Rng& rng) const {
    const Room& room = *c.room;
    const int f = c.floor;
    const auto& targets = c.targets;
    QAItem qa;
    qa.scene_id = scene_.scene_id;
    qa.qtype = qtype;
    qa.gt_floor = f;
    qa.bev_resolution = opts_.bev_resolution;
    qa.referent = c.referent;

    // Zoom region: the room plus a random margin, snapped outward to whole pixels.
    const Rect& fp = scene_.floors[static_cast<std::size_t>(f)].footprint;
    const double margin = rng.uniform(0.0, 1.5);
    Rect region = intersection(room.rect.inset(-margin), fp);
    for (const auto* t : targets) region = bounding_union(region, t->aabb.footprint());
    const BBox2D px = bev_mapping(scene_, f, opts_.bev_resolution).to_pixel(region);
    const double res = opts_.bev_resolution;
    qa.gt_bbox = BBox2D{std::clamp(std::floor(px.x_min), 0.0, res), std::clamp(std::floor(px.y_min), 0.0, res),
                        std::clamp(std::ceil(px.x_max), 0.0, res), std::clamp(std::ceil(px.y_max), 0.0, res)};

    auto pose = sample_pose(room, f, targets, rng);
    if (!pose) return std::nullopt;
    qa.gt_pose = *pose;
    for (const auto* t : targets) qa.target_ids.push_back(t->object_id);

    qa.answer = qtype == QuestionType::Counting ? std::to_string(targets.size())
                                                : attribute_answer(scene_, *targets.front(), qtype);
    qa.question = phrase(qa, room, *targets.front(), rng);
    return qa;
  }

 private:
  static Referent referent_for(const SceneObject& o, QuestionType qtype, const Room& room) {
    if (qtype == QuestionType::Position) return Referent{o.class_name, std::nullopt, std::nullopt, o.color};
    return Referent{o.class_name, o.floor_index, room.category, std::nullopt};
  }

  std::vector<const SceneObject*> objects_on(int f) const {
    return query_objects(scene_, ObjectFilter{.floor = f});
  }

  std::optional<CameraPose> sample_pose(const Room& room, int f, const std::vector<const SceneObject*>& targets,
                                        Rng& rng) const {
    const Floor& fl = scene_.floors[static_cast<std::size_t>(f)];
    const Rect area = room.rect.inset(0.35);
    if (area.width() <= 0.0 || area.height() <= 0.0) return std::nullopt;
    Vec3 aim{};
    for (const auto* t : targets) aim = aim + t->aabb.center();
    aim = aim * (1.0 / static_cast<double>(targets.size()));
    const auto in_room = query_objects(scene_, ObjectFilter{.room_id = room.room_id});
    const FloorGeometry& geom = geometry_[static_cast<std::size_t>(f)];

    for (int attempt = 0; attempt < 16; ++attempt) {
      const Vec2 xy{rng.uniform(area.x0, area.x1), rng.uniform(area.y0, area.y1)};
      const bool blocked = std::ranges::any_of(in_room, [&](const SceneObject* o) {
        return o->aabb.footprint().inset(-0.25).contains(xy);
      });
      if (blocked) continue;
      CameraPose pose;
      pose.position = {quantize(xy.x), quantize(xy.y), quantize(fl.elevation_z + rng.uniform(1.2, 1.7))};
      const Vec3 d = aim - pose.position;
      const double horiz = std::hypot(d.x, d.y);
      if (horiz < 0.6) continue;
      pose.yaw = quantize(wrap_yaw(rad2deg(std::atan2(d.y, d.x))));
      if (pose.yaw >= 180.0) pose.yaw = -180.0;
      pose.pitch = quantize(std::clamp(rad2deg(std::atan2(d.z, horiz)), -80.0, 80.0));
      pose.fov = kDefaultFov;
      const bool visible = std::ranges::all_of(targets, [&](const SceneObject* t) {
        return count_visible_pixels(geom, scene_, pose, opts_.view_resolution, index_.at(t->object_id)) >=
               opts_.min_visible_pixels;
      });
      if (visible) return pose;
    }
    return std::nullopt;
  }

  std::string phrase(const QAItem& qa, const Room& room, const SceneObject& target, Rng& rng) const {
    const auto& pool = templates(qa.qtype);
    const std::string_view tmpl = pool[static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(pool.size()) - 1))];
    std::vector<std::pair<std::string, std::string>> slots = {
        {"cls", qa.referent.class_name},
        {"pl", plural(qa.referent.class_name)},
        {"room", std::string(display_name(room.category))},
        {"floor", fmt::format("floor {}", floor_number(qa.gt_floor))},
        {"color", std::string(to_string(target.color))}};
    if (qa.qtype == QuestionType::State) {
      const auto* info = find_object_class(target.class_name);
      std::vector<std::string> options;
      for (ObjectState s : info->states) options.emplace_back(to_string(s));
      if (rng.bernoulli(0.5)) std::ranges::reverse(options);
      slots.emplace_back("a", options.at(0));
      slots.emplace_back("b", options.at(1));
    }
    return fill(tmpl, slots);
  }

  const Scene& scene_;
  QAOptions opts_;
  std::vector<FloorGeometry> geometry_;
  std::map<std::string, std::int32_t> index_;
};

}  // namespace

std::vector<QAItem> generate_qa(const Scene& scene, int n, std::uint64_t seed, const QAOptions& opts) {
  if (n < 1) throw Error(ErrorCode::InvalidArgument, "n must be >= 1");
  if (scene.objects.empty()) {
    throw Error(ErrorCode::InvalidArgument, fmt::format("scene {} has no objects", scene.scene_id));
  }
  const QAGenerator gen(scene, opts);
  std::array<std::vector<QAGenerator::Candidate>, kAllQuestionTypes.size()> live;
  for (std::size_t t = 0; t < live.size(); ++t) live[t] = gen.candidates(kAllQuestionTypes[t]);
  // Candidates that never yield a visible pose are dropped after a few tries.
  constexpr int kCandidateTries = 4;
  std::map<std::pair<std::size_t, std::string>, int> failures;
  std::vector<QAItem> items;
  items.reserve(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) {
    Rng rng(derive_seed(seed, fmt::format("{}/{}", scene.scene_id, k)));
    std::optional<QAItem> item;
    int attempts = 0;
    while (!item) {
      // Types this scene cannot support are redrawn from the remaining weights.
      std::array<double, kAllQuestionTypes.size()> weights = opts.type_weights;
      for (std::size_t t = 0; t < live.size(); ++t) {
        if (live[t].empty()) weights[t] = 0.0;
      }
      if (std::ranges::all_of(weights, [](double w) { return w <= 0.0; }) || attempts >= opts.max_attempts) {
        throw Error(ErrorCode::GenerationFailed,
                    fmt::format("no question found for scene {} item {}", scene.scene_id, k));
      }
      const std::size_t t = rng.weighted(weights);
      auto& pool = live[t];
      while (!pool.empty() && !item && attempts < opts.max_attempts) {
        ++attempts;
        const auto i = static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(pool.size()) - 1));
        item = gen.attempt(kAllQuestionTypes[t], pool[i], rng);
        if (item) break;
        const auto key = std::make_pair(t, pool[i].targets.front()->object_id + "/" + pool[i].referent.class_name);
        if (++failures[key] >= kCandidateTries) pool.erase(pool.begin() + static_cast<std::ptrdiff_t>(i));
      }
    }
    item->qa_id = fmt::format("{}-q{:05}", scene.scene_id, k);
    items.push_back(std::move(*item));
  }
  return items;
}

namespace {

std::string normalize(std::string_view s) {
  std::string out;
  bool space = false;
  for (char c : s) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      space = !out.empty();
      continue;
    }
    if (space) out += ' ';
    space = false;
    out += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  }
  return out;
}

}  // namespace

std::optional<int> parse_count(std::string_view text) {
  const std::string s = normalize(text);
  if (s.empty()) return std::nullopt;
  if (std::ranges::all_of(s, [](char c) { return std::isdigit(static_cast<unsigned char>(c)); })) {
    int v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec == std::errc{} && p == s.data() + s.size()) return v;
    return std::nullopt;
  }
  static constexpr std::array<std::string_view, 21> words = {
      "zero", "one", "two", "three", "four", "five", "six", "seven", "eight", "nine", "ten",
      "eleven", "twelve", "thirteen", "fourteen", "fifteen", "sixteen", "seventeen", "eighteen",
      "nineteen", "twenty"};
  for (std::size_t i = 0; i < words.size(); ++i) {
    if (s == words[i]) return static_cast<int>(i);
  }
  return std::nullopt;
}

bool match_answer(std::string_view predicted, const QAItem& qa) {
  if (qa.qtype == QuestionType::Counting) {
    const auto a = parse_count(predicted);
    const auto b = parse_count(qa.answer);
    return a && b && *a == *b;
  }
  const std::string p = normalize(predicted);
  return !p.empty() && p == normalize(qa.answer);
}

std::vector<int> target_visibility(const Scene& scene, const QAItem& qa, int view_resolution) {
  check_pose(scene, qa.gt_pose);
  const FloorGeometry geom(scene, floor_of_position(scene, qa.gt_pose.position));
  std::vector<int> out;
  for (const auto& id : qa.target_ids) {
    const SceneObject* obj = scene.find_object(id);
    if (!obj) throw Error(ErrorCode::NotFound, fmt::format("unknown target object {}", id));
    const auto idx = static_cast<std::int32_t>(obj - scene.objects.data());
    out.push_back(count_visible_pixels(geom, scene, qa.gt_pose, view_resolution, idx));
  }
  return out;
}

std::string read_answer(const Scene& scene, const QAItem& qa, const Observed& observed, int bev_resolution,
                        int zoom_resolution, int view_resolution) {
  std::vector<int> zoom_px(scene.objects.size(), 0), view_px(scene.objects.size(), 0);
  if (observed.zoom) {
    try {
      zoom_px = render_zoom_raster(scene, observed.zoom->first, observed.zoom->second, zoom_resolution, bev_resolution)
                    .ids.histogram(scene.objects.size());
    } catch (const Error&) {
    }
  }
  if (observed.pose) {
    try {
      view_px = render_view_raster(scene, *observed.pose, view_resolution).ids.histogram(scene.objects.size());
    } catch (const Error&) {
    }
  }
  return read_answer_from(scene, qa, zoom_px, view_px);
}

std::string read_answer_from(const Scene& scene, const QAItem& qa, std::span<const int> zoom_px,
                             std::span<const int> view_px) {
  const ObjectFilter filter = qa.referent.to_filter();
  std::vector<std::size_t> seen;
  for (std::size_t i = 0; i < scene.objects.size(); ++i) {
    if ((zoom_px[i] > 0 || view_px[i] > 0) && filter.matches(scene, scene.objects[i])) seen.push_back(i);
  }
  if (qa.qtype == QuestionType::Counting) return std::to_string(seen.size());
  if (seen.empty()) return {};
  const auto best = std::ranges::max_element(seen, [&](std::size_t a, std::size_t b) {
    return std::pair(view_px[a], zoom_px[a]) < std::pair(view_px[b], zoom_px[b]);
  });
  return attribute_answer(scene, scene.objects[*best], qa.qtype);
}

std::string replay_answer(const Scene& scene, const QAItem& qa) {
  return read_answer(scene, qa, Observed{std::pair(qa.gt_floor, qa.gt_bbox), qa.gt_pose}, qa.bev_resolution);
}

FilterResult quality_filter(const Scene& scene, const std::vector<ReplayedItem>& items, int min_visible_pixels,
                            int view_resolution) {
  FilterResult out;
  for (const auto& [qa, replayed] : items) {
    std::string reason;
    if (singular(qa.qtype) && query_objects(scene, qa.referent.to_filter()).size() > 1) {
      reason = "ambiguous";
    } else {
      std::vector<int> vis;
      try {
        vis = target_visibility(scene, qa, view_resolution);
      } catch (const Error&) {
        vis.assign(1, 0);
      }
      if (vis.empty() || std::ranges::any_of(vis, [&](int px) { return px < min_visible_pixels; })) {
        reason = "visibility";
      } else if (!match_answer(replayed, qa)) {
        reason = "inconsistent";
      }
    }
    if (reason.empty()) {
      out.kept.push_back(qa);
    } else {
      out.rejected.push_back({qa.qa_id, reason});
    }
  }
  return out;
}

QASetStats qa_stats(const std::vector<QAItem>& items, const std::vector<Rejection>& rejected) {
  QASetStats s;
  std::set<std::string> scenes;
  for (QuestionType t : kAllQuestionTypes) s.counts[t] = 0;
  for (const auto& qa : items) {
    ++s.counts[qa.qtype];
    scenes.insert(qa.scene_id);
  }
  s.total = static_cast<int>(items.size());
  s.scenes = static_cast<int>(scenes.size());
  for (const auto& [t, c] : s.counts) s.fractions[t] = s.total > 0 ? static_cast<double>(c) / s.total : 0.0;
  for (const auto& r : rejected) ++s.rejections[r.reason];
  return s;
}

Json to_json(const QASetStats& s) {
  Json counts = Json::object(), fractions = Json::object();
  for (QuestionType t : kAllQuestionTypes) {
    counts[std::string(to_string(t))] = s.counts.count(t) ? s.counts.at(t) : 0;
    fractions[std::string(to_string(t))] = s.fractions.count(t) ? s.fractions.at(t) : 0.0;
  }
  Json rej = Json::object();
  for (const auto& [k, v] : s.rejections) rej[k] = v;
  return Json{{"total", s.total}, {"scenes", s.scenes}, {"counts", counts}, {"fractions", fractions}, {"rejections", rej}};
}

std::array<double, 6> parse_type_distribution(std::string_view text) {
  std::array<double, 6> out{};
  std::size_t i = 0, start = 0;
  const std::string s(text);
  while (start <= s.size()) {
    std::size_t end = s.find(',', start);
    if (end == std::string::npos) end = s.size();
    if (i >= out.size()) throw Error(ErrorCode::InvalidArgument, "expected 6 type weights");
    try {
      out[i++] = std::stod(s.substr(start, end - start));
    } catch (const std::exception&) {
      throw Error(ErrorCode::InvalidArgument, fmt::format("bad type weight list '{}'", text));
    }
    start = end + 1;
  }
  if (i != out.size() || std::ranges::any_of(out, [](double w) { return !(w >= 0.0); }) ||
      std::ranges::all_of(out, [](double w) { return w == 0.0; })) {
    throw Error(ErrorCode::InvalidArgument, "expected 6 non-negative type weights");
  }
  return out;
}

}  // namespace arena
