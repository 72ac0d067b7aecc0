#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "spatial_arena/episode.hpp"
#include "spatial_arena/qa.hpp"
#include "spatial_arena/rng.hpp"

namespace arena {

enum class ErrorType { WrongPosition, WrongBBox, WrongCamera };
enum class CorrectionMode { Progressive, Reset };
inline constexpr std::array kAllErrorTypes = {ErrorType::WrongPosition, ErrorType::WrongBBox, ErrorType::WrongCamera};

std::string_view to_string(ErrorType t);
std::string_view to_string(CorrectionMode m);
ErrorType parse_error_type(std::string_view s);
CorrectionMode parse_correction_mode(std::string_view s);

struct Injection {
  bool injected = false;
  ErrorType error_type = ErrorType::WrongBBox;
  CorrectionMode mode = CorrectionMode::Progressive;
  int adjustment_count = 0;  // Progressive only
  friend bool operator==(const Injection&, const Injection&) = default;
};

enum class TurnRole { Clean, Error, Adjust, Abandon, Answer };
std::string_view to_string(TurnRole r);

struct Turn {
  TurnRole role = TurnRole::Clean;
  std::string reasoning;
  std::optional<ToolCall> call;  // empty for the abandonment turn
  std::string observation_hash;
  std::string observation_note;
  friend bool operator==(const Turn&, const Turn&) = default;
};

struct TrainingRecord {
  std::string record_id;
  std::string qa_id;
  std::string scene_id;
  std::string question;
  std::vector<Turn> turns;
  std::string final_answer;
  Injection injection;
  friend bool operator==(const TrainingRecord&, const TrainingRecord&) = default;

  /// Every tool call in order, the final Answer included.
  std::vector<ToolCall> calls() const;
};

struct ForgeOptions {
  double bbox_jitter = 0.05;  // fraction of the gt bbox diagonal
  double angle_jitter_deg = 5.0;
  double inject_rate = 0.25;
  double progressive_share = 0.70;
  std::array<double, 3> error_type_weights = {1.0, 1.0, 1.0};
  bool zero_jitter = false;
  int workers = 1;  // synth_corpus threads
};

struct InjectionRequest {
  std::optional<ErrorType> error_type;
  std::optional<CorrectionMode> mode;
  std::optional<int> adjustments;  // 2 or 3
};

/// The environment supplies the scene and render settings.
TrainingRecord synth_clean(const Environment& env, const QAItem& qa, Rng& rng, const ForgeOptions& opts = {});
TrainingRecord synth_injected(const Environment& env, const QAItem& qa, Rng& rng, const ForgeOptions& opts = {},
                              const InjectionRequest& req = {});

struct CorpusStats {
  int total = 0;
  int injected = 0;
  int progressive = 0;
  int reset = 0;
  std::array<int, 3> error_types{};

  double injected_fraction() const { return total ? static_cast<double>(injected) / total : 0.0; }
  double progressive_fraction() const { return injected ? static_cast<double>(progressive) / injected : 0.0; }
};

CorpusStats corpus_stats(const std::vector<TrainingRecord>& records);
Json to_json(const CorpusStats& s);

/// One record per QA item, in input order; per-item randomness from (seed, qa_id).
std::vector<TrainingRecord> synth_corpus(const Environment& env, const std::vector<QAItem>& items,
                                         std::uint64_t seed, const ForgeOptions& opts = {});

/// Record with a chat-style `messages` array plus structured turns.
Json to_json(const TrainingRecord& r);
TrainingRecord record_from_json(const Json& j);

}  // namespace arena
