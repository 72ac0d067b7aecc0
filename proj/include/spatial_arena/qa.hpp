#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "spatial_arena/json_io.hpp"
#include "spatial_arena/renderer.hpp"
#include "spatial_arena/scene.hpp"

namespace arena {

enum class QuestionType { Position, Color, Material, Counting, Shape, State };

inline constexpr std::array kAllQuestionTypes = {QuestionType::Position, QuestionType::Color,
                                                 QuestionType::Material, QuestionType::Counting,
                                                 QuestionType::Shape,    QuestionType::State};

/// Type mix of the reference dataset, in kAllQuestionTypes order (percent).
inline constexpr std::array<double, 6> kReferenceTypeDistribution = {35.5, 31.6, 15.6, 13.3, 3.0, 3.0};

std::string_view to_string(QuestionType t);
QuestionType parse_question_type(std::string_view s);

/// What a question refers to, as a text reader would resolve it. Unset fields
/// are unconstrained.
struct Referent {
  std::string class_name;
  std::optional<int> floor;
  std::optional<RoomCategory> room;
  std::optional<Color> color;

  ObjectFilter to_filter() const;
  friend bool operator==(const Referent&, const Referent&) = default;
};

struct QAItem {
  std::string qa_id;
  std::string scene_id;
  std::string question;
  QuestionType qtype = QuestionType::Color;
  std::string answer;
  Referent referent;
  int gt_floor = 0;
  BBox2D gt_bbox;  // BEV pixels at bev_resolution
  int bev_resolution = kDefaultBevResolution;
  CameraPose gt_pose;
  std::vector<std::string> target_ids;

  friend bool operator==(const QAItem&, const QAItem&) = default;
};

Json to_json(const QAItem& qa);
QAItem qa_from_json(const Json& j);

/// 1-based floor number used in question and answer text.
inline int floor_number(int floor_index) { return floor_index + 1; }
/// Canonical Position answer: "in the <room> on floor <k>".
std::string position_phrase(RoomCategory room, int floor_index);
/// Attribute value of `obj` that a question of type `t` asks about (not Counting).
std::string attribute_answer(const Scene& scene, const SceneObject& obj, QuestionType t);

/// Ground-truth answer computed from the referent with query_objects alone.
/// Returns nullopt when the referent matches nothing, or more than one object
/// for a singular question type.
std::optional<std::string> oracle_answer(const Scene& scene, const QAItem& qa);

struct QAOptions {
  /// Relative weights per question type, kAllQuestionTypes order.
  std::array<double, 6> type_weights = kReferenceTypeDistribution;
  int bev_resolution = kDefaultBevResolution;
  int view_resolution = kDefaultViewResolution;
  int min_visible_pixels = 50;
  int max_attempts = 400;
};

/// A type the scene cannot support is redrawn from the remaining weights.
/// Throws Error{InvalidArgument} for an object-less scene or n < 1, and
/// Error{GenerationFailed} if some item exhausts its attempts.
std::vector<QAItem> generate_qa(const Scene& scene, int n, std::uint64_t seed, const QAOptions& opts = {});

/// Case-insensitive, whitespace-normalized exact match. Counting accepts
/// digits or number words for the same integer.
bool match_answer(std::string_view predicted, const QAItem& qa);
std::optional<int> parse_count(std::string_view text);

/// Per-target visible pixel counts at the item's gt_pose.
std::vector<int> target_visibility(const Scene& scene, const QAItem& qa,
                                   int view_resolution = kDefaultViewResolution);

/// Answer a reader obtains from what was observed: objects drawn in the zoom
/// raster of `zoom` (if any) and the view raster at `pose` (if any).
struct Observed {
  std::optional<std::pair<int, BBox2D>> zoom;  // floor, bbox
  std::optional<CameraPose> pose;
};
std::string read_answer(const Scene& scene, const QAItem& qa, const Observed& observed,
                        int bev_resolution = kDefaultBevResolution,
                        int zoom_resolution = kDefaultZoomResolution,
                        int view_resolution = kDefaultViewResolution);

/// Same reading rule from per-object pixel counts (indexed like Scene::objects).
std::string read_answer_from(const Scene& scene, const QAItem& qa, std::span<const int> zoom_px,
                             std::span<const int> view_px);

/// Replays the generation trajectory (zoom to gt_bbox, view at gt_pose) and reads the answer.
std::string replay_answer(const Scene& scene, const QAItem& qa);

struct Rejection {
  std::string qa_id;
  std::string reason;  // "inconsistent" | "visibility" | "ambiguous"
};

struct FilterResult {
  std::vector<QAItem> kept;
  std::vector<Rejection> rejected;
};

struct ReplayedItem {
  QAItem item;
  std::string replayed_answer;
};

FilterResult quality_filter(const Scene& scene, const std::vector<ReplayedItem>& items,
                            int min_visible_pixels = 50,
                            int view_resolution = kDefaultViewResolution);

struct QASetStats {
  std::map<QuestionType, int> counts;
  std::map<QuestionType, double> fractions;
  int total = 0;
  int scenes = 0;
  std::map<std::string, int> rejections;
};

QASetStats qa_stats(const std::vector<QAItem>& items, const std::vector<Rejection>& rejected = {});
Json to_json(const QASetStats& s);

/// Parses "35.5,31.6,15.6,13.3,3,3" into type weights.
std::array<double, 6> parse_type_distribution(std::string_view text);

}  // namespace arena
