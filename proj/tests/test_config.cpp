#include <gtest/gtest.h>
#include <unistd.h>

#include <filesystem>

#include "spatial_arena/config.hpp"
#include "spatial_arena/error.hpp"

namespace arena {
namespace {

namespace fs = std::filesystem;

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("arena-config-" + std::to_string(::getpid()));
  fs::create_directories(dir);
  return dir / name;
}

TEST(Sha256, KnownVectors) {
  EXPECT_EQ(sha256_hex(""), "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  EXPECT_EQ(sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST(ConfigHash, FollowsCanonicalText) {
  const Json a{{"x", 1}, {"y", 0.25}};
  EXPECT_EQ(config_hash(a), sha256_hex(R"({"x":1,"y":0.2500})"));
  EXPECT_NE(config_hash(a), config_hash(Json{{"x", 2}, {"y", 0.25}}));
}

TEST(Toml, ConvertsTablesArraysAndScalars) {
  const Json j = toml_to_json(R"(
top = "yes"
[reward]
tau_low = 0.25
n_max = 6
on = true
dist = [35.5, 31.6]
)");
  EXPECT_EQ(j["top"], "yes");
  EXPECT_DOUBLE_EQ(j["reward"]["tau_low"].get<double>(), 0.25);
  EXPECT_EQ(j["reward"]["n_max"], 6);
  EXPECT_EQ(j["reward"]["on"], true);
  EXPECT_EQ(j["reward"]["dist"].size(), 2u);
}

TEST(Toml, RejectsMalformedAndDates) {
  for (const char* text : {"a = ", "[x\nb = 1", "when = 1979-05-27"}) {
    try {
      toml_to_json(text);
      FAIL() << text;
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::InvalidArgument) << text;
    }
  }
}

TEST(ConfigFile, LoadsShippedDefaults) {
  const Json j = load_config_file(fs::path(ARENA_CONFIG_DIR) / "default.toml");
  for (const char* section : {"generator", "qa", "forge", "env", "reward"}) EXPECT_TRUE(j.contains(section)) << section;
  EXPECT_EQ(j["env"]["step_budget"], 12);
}

TEST(ConfigFile, JsonAndMissingFiles) {
  const fs::path p = scratch("c.json");
  write_text_atomic(p, R"({"env":{"fov":75.0}})");
  EXPECT_DOUBLE_EQ(load_config_file(p)["env"]["fov"].get<double>(), 75.0);
  try {
    load_config_file(scratch("absent.toml"));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::Io);
  }
}

TEST(WriteAtomic, ReplacesContentAndLeavesNoTemp) {
  const fs::path p = scratch("out.txt");
  write_text_atomic(p, "first");
  write_text_atomic(p, "second\n");
  EXPECT_EQ(read_text_file(p), "second\n");
  fs::path tmp = p;
  tmp += ".tmp";
  EXPECT_FALSE(fs::exists(tmp));
  EXPECT_THROW(write_text_atomic(scratch("no/such/dir/x.txt"), "x"), Error);
  fs::remove_all(p.parent_path());
}

}  // namespace
}  // namespace arena
