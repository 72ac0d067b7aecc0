#include "settings.hpp"

#include <fmt/format.h>

#include <set>

#include "spatial_arena/config.hpp"
#include "spatial_arena/error.hpp"

namespace arena::cli {

namespace {

void reject_unknown(const Json& section, const char* name, const std::set<std::string>& known) {
  if (!section.is_object()) throw Error(ErrorCode::InvalidArgument, fmt::format("[{}] must be a table", name));
  for (const auto& [key, _] : section.items()) {
    if (!known.count(key)) throw Error(ErrorCode::InvalidArgument, fmt::format("unknown key '{}' in [{}]", key, name));
  }
}

template <typename T>
void read(const Json& section, const char* key, T& out) {
  if (!section.contains(key)) return;
  try {
    out = section[key].get<T>();
  } catch (const Json::exception&) {
    throw Error(ErrorCode::InvalidArgument, fmt::format("bad value for '{}'", key));
  }
}

}  // namespace

Settings settings_from_json(const Json& j) {
  if (!j.is_object()) throw Error(ErrorCode::InvalidArgument, "config must be a table");
  reject_unknown(j, "root", {"generator", "qa", "forge", "env", "reward"});
  Settings s;
  if (j.contains("generator")) s.generator = profile_from_json(j["generator"]);
  if (j.contains("env")) {
    const Json& e = j["env"];
    reject_unknown(e, "env", {"step_budget", "bev_resolution", "zoom_resolution", "view_resolution", "fov"});
    read(e, "step_budget", s.env.step_budget);
    read(e, "bev_resolution", s.env.bev_resolution);
    read(e, "zoom_resolution", s.env.zoom_resolution);
    read(e, "view_resolution", s.env.view_resolution);
    read(e, "fov", s.env.fov);
    s.env.validate();
  }
  s.qa.bev_resolution = s.env.bev_resolution;
  s.qa.view_resolution = s.env.view_resolution;
  if (j.contains("qa")) {
    const Json& q = j["qa"];
    reject_unknown(q, "qa", {"type_distribution", "min_visible_pixels", "max_attempts", "per_scene"});
    if (q.contains("type_distribution")) {
      std::vector<double> w;
      read(q, "type_distribution", w);
      std::string text;
      for (double x : w) text += fmt::format("{}{}", text.empty() ? "" : ",", x);
      s.qa.type_weights = parse_type_distribution(text);
    }
    read(q, "min_visible_pixels", s.qa.min_visible_pixels);
    read(q, "max_attempts", s.qa.max_attempts);
    read(q, "per_scene", s.qa_per_scene);
    if (s.qa_per_scene < 1) throw Error(ErrorCode::InvalidArgument, "qa.per_scene must be >= 1");
  }
  if (j.contains("forge")) {
    const Json& f = j["forge"];
    reject_unknown(f, "forge", {"bbox_jitter", "angle_jitter_deg", "inject_rate", "progressive_share",
                                "error_type_weights", "zero_jitter"});
    read(f, "bbox_jitter", s.forge.bbox_jitter);
    read(f, "angle_jitter_deg", s.forge.angle_jitter_deg);
    read(f, "inject_rate", s.forge.inject_rate);
    read(f, "progressive_share", s.forge.progressive_share);
    read(f, "error_type_weights", s.forge.error_type_weights);
    read(f, "zero_jitter", s.forge.zero_jitter);
  }
  if (j.contains("reward")) s.reward = reward_config_from_json(j["reward"]);
  return s;
}

Settings load_settings(const std::optional<std::filesystem::path>& path) {
  if (!path) return Settings{};
  return settings_from_json(load_config_file(*path));
}

Json to_json(const QAOptions& o, int per_scene) {
  return Json{{"type_distribution", o.type_weights},
              {"min_visible_pixels", o.min_visible_pixels},
              {"max_attempts", o.max_attempts},
              {"per_scene", per_scene},
              {"bev_resolution", o.bev_resolution},
              {"view_resolution", o.view_resolution}};
}

Json to_json(const ForgeOptions& o) {
  return Json{{"bbox_jitter", o.bbox_jitter},
              {"angle_jitter_deg", o.angle_jitter_deg},
              {"inject_rate", o.inject_rate},
              {"progressive_share", o.progressive_share},
              {"error_type_weights", o.error_type_weights},
              {"zero_jitter", o.zero_jitter}};
}

Json to_json(const EnvConfig& c) {
  return Json{{"step_budget", c.step_budget},
              {"bev_resolution", c.bev_resolution},
              {"zoom_resolution", c.zoom_resolution},
              {"view_resolution", c.view_resolution},
              {"fov", c.fov}};
}

}  // namespace arena::cli
