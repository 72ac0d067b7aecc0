#pragma once

#include <filesystem>
#include <optional>

#include "spatial_arena/episode.hpp"
#include "spatial_arena/qa.hpp"
#include "spatial_arena/reward.hpp"
#include "spatial_arena/scene.hpp"
#include "spatial_arena/trajectory_forge.hpp"

namespace arena::cli {

// One config file, sections [generator] [qa] [forge] [env] [reward].
struct Settings {
  GeneratorProfile generator;
  QAOptions qa;
  int qa_per_scene = 20;
  ForgeOptions forge;
  EnvConfig env;
  RewardConfig reward;
};

Settings settings_from_json(const Json& j);
Settings load_settings(const std::optional<std::filesystem::path>& path);

Json to_json(const QAOptions& o, int per_scene);
Json to_json(const ForgeOptions& o);
Json to_json(const EnvConfig& c);

}  // namespace arena::cli
