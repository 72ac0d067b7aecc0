#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "spatial_arena/error.hpp"

namespace arena {
namespace {

using testing::shared_world;

ToolCall zoom(int floor, BBox2D b) { return ToolCall{ZoomIn{floor, b}}; }
ToolCall view(CameraPose p) { return ToolCall{RenderView{p}}; }
ToolCall answer(std::string text) { return ToolCall{Answer{std::move(text)}}; }

const QAItem& first_item() { return shared_world().items.front(); }

TEST(Episode, StartShowsOneBevPerFloor) {
  const auto& w = shared_world();
  for (const auto& qa : w.items) {
    const Scene& s = w.env.scene(qa.scene_id);
    const EpisodeState st = w.env.start_episode(qa.scene_id, qa.qa_id);
    ASSERT_EQ(static_cast<int>(st.current.images.size()), s.floor_count());
    for (int f = 0; f < s.floor_count(); ++f) {
      EXPECT_EQ(st.current.images[f].width(), 512);
      EXPECT_EQ(st.current.hashes[f], content_hash(render_bev(s, f)));
    }
    EXPECT_EQ(st.t, 0);
    EXPECT_EQ(st.question, qa.question);
    EXPECT_NE(st.current.note.find(qa.question), std::string::npos);
  }
}

TEST(Episode, GtCallsAnswerCorrectly) {
  const auto& w = shared_world();
  for (const auto& qa : w.items) {
    EpisodeState st = w.env.start_episode(qa.scene_id, qa.qa_id);
    const Observation z = w.env.step(st, zoom(qa.gt_floor, qa.gt_bbox));
    EXPECT_EQ(z.images.at(0).width(), 512);
    EXPECT_FALSE(z.error);
    const Observation v = w.env.step(st, view(qa.gt_pose));
    EXPECT_EQ(v.images.at(0).width(), 256);
    const Observation a = w.env.step(st, answer(qa.answer));
    EXPECT_TRUE(a.terminal);
    EXPECT_TRUE(st.correct);
    EXPECT_EQ(st.termination, Termination::Answered);
    EXPECT_EQ(st.tool_calls(), 2);
    EXPECT_EQ(st.t, 3);
  }
}

TEST(Episode, BudgetForcesTermination) {
  const auto& w = shared_world();
  const QAItem& qa = first_item();
  EpisodeState st = w.env.start_episode(qa.scene_id, qa.qa_id);
  for (int i = 0; i < 12; ++i) {
    const Observation o = w.env.step(st, zoom(0, {10.0 + i, 10, 200, 200}));
    EXPECT_FALSE(o.terminal);
  }
  EXPECT_EQ(st.tool_calls(), 12);
  const Observation last = w.env.step(st, zoom(0, {0, 0, 100, 100}));
  EXPECT_TRUE(last.terminal);
  EXPECT_TRUE(last.images.empty());
  EXPECT_TRUE(st.terminated);
  EXPECT_EQ(st.termination, Termination::ForcedTermination);
  EXPECT_FALSE(st.correct);
  EXPECT_EQ(st.answer, "");
  EXPECT_THROW(w.env.step(st, answer(qa.answer)), Error);

  const Trajectory t = to_trajectory(st);
  EXPECT_TRUE(t.forced);
  EXPECT_EQ(t.calls.size(), 13u);
  EXPECT_EQ(t.calls.back().kind(), ToolKind::Answer);
}

TEST(Episode, AnswerAllowedAfterFullBudget) {
  const auto& w = shared_world();
  const QAItem& qa = first_item();
  EpisodeState st = w.env.start_episode(qa.scene_id, qa.qa_id);
  for (int i = 0; i < 11; ++i) w.env.step(st, zoom(0, {0, 0, 300, 300}));
  w.env.step(st, zoom(qa.gt_floor, qa.gt_bbox));
  w.env.step(st, answer(qa.answer));
  EXPECT_TRUE(st.correct);
  EXPECT_EQ(st.termination, Termination::Answered);
}

TEST(Episode, SmallBudget) {
  const auto& base = shared_world();
  Environment env(EnvConfig{.step_budget = 2});
  const QAItem& qa = first_item();
  env.add_scene(base.env.scene(qa.scene_id));
  env.add_qa(qa);
  EpisodeState st = env.start_episode(qa.scene_id, qa.qa_id);
  env.step(st, zoom(qa.gt_floor, qa.gt_bbox));
  env.step(st, view(qa.gt_pose));
  env.step(st, view(qa.gt_pose));
  EXPECT_EQ(st.termination, Termination::ForcedTermination);
}

TEST(Episode, MalformedCallConsumesNoStep) {
  const auto& w = shared_world();
  const QAItem& qa = first_item();
  EpisodeState st = w.env.start_episode(qa.scene_id, qa.qa_id);
  const double nan = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(w.env.step(st, zoom(0, {nan, 0, 10, 10})), Error);
  CameraPose p = qa.gt_pose;
  p.yaw = std::numeric_limits<double>::infinity();
  EXPECT_THROW(w.env.step(st, view(p)), Error);
  EXPECT_EQ(st.t, 0);
  EXPECT_TRUE(st.history.empty());

  EXPECT_THROW(tool_call_from_json(parse_json(R"({"name":"zoom_in","floor":0,"bbox":[1,2,3]})")), Error);
  EXPECT_THROW(tool_call_from_json(parse_json(R"({"name":"fly"})")), Error);
  EXPECT_THROW(tool_call_from_json(parse_json(R"({"name":"render_view","pos":[1,2,"x"],"theta":[0,0,0]})")), Error);
  EXPECT_THROW(tool_call_from_json(parse_json(R"({"name":"answer"})")), Error);
  EXPECT_THROW(tool_call_from_json(parse_json(R"([1,2])")), Error);
}

TEST(Episode, ErrorObservationConsumesStep) {
  const auto& w = shared_world();
  const QAItem& qa = first_item();
  const Scene& s = w.env.scene(qa.scene_id);
  EpisodeState st = w.env.start_episode(qa.scene_id, qa.qa_id);

  const Observation bad_floor = w.env.step(st, zoom(s.floor_count(), {0, 0, 100, 100}));
  EXPECT_TRUE(bad_floor.error);
  EXPECT_NE(bad_floor.note.find("InvalidArgument"), std::string::npos);

  const Observation tiny = w.env.step(st, zoom(0, {600, 600, 700, 700}));
  EXPECT_TRUE(tiny.error);
  EXPECT_NE(tiny.note.find("InvalidRegion"), std::string::npos);

  CameraPose outside = qa.gt_pose;
  outside.position.x = s.floors[0].footprint.x1 + 10.0;
  const Observation oob = w.env.step(st, view(outside));
  EXPECT_TRUE(oob.error);
  EXPECT_NE(oob.note.find("PoseOutOfBounds"), std::string::npos);

  EXPECT_EQ(st.t, 3);
  EXPECT_EQ(st.tool_calls(), 3);
  EXPECT_FALSE(st.history[0].valid);
  EXPECT_EQ(st.history[1].digest, "error:InvalidRegion");
  EXPECT_FALSE(st.terminated);
}

TEST(Episode, ZoomClampFlag) {
  const auto& w = shared_world();
  const QAItem& qa = first_item();
  EpisodeState st = w.env.start_episode(qa.scene_id, qa.qa_id);
  EXPECT_TRUE(w.env.step(st, zoom(0, {-20, -20, 100, 100})).clamped);
  EXPECT_FALSE(w.env.step(st, zoom(0, {0, 0, 100, 100})).clamped);
}

TEST(Episode, IdentityZoomMatchesBev) {
  const auto& w = shared_world();
  const QAItem& qa = first_item();
  const Scene& s = w.env.scene(qa.scene_id);
  EpisodeState st = w.env.start_episode(qa.scene_id, qa.qa_id);
  const std::vector<std::string> bev = st.current.hashes;
  for (int f = 0; f < s.floor_count(); ++f) {
    const Observation o = w.env.step(st, zoom(f, {0, 0, 512, 512}));
    EXPECT_EQ(o.hashes.at(0), bev[f]);
  }
}

TEST(Episode, ReplayReproducesHashes) {
  const auto& w = shared_world();
  for (std::size_t k = 0; k < w.items.size(); k += 4) {
    const QAItem& qa = w.items[k];
    EpisodeState st = w.env.start_episode(qa.scene_id, qa.qa_id, "ep-" + std::to_string(k));
    w.env.step(st, zoom(qa.gt_floor, {qa.gt_bbox.x_min - 30, qa.gt_bbox.y_min - 30, qa.gt_bbox.x_max + 30,
                                      qa.gt_bbox.y_max + 30}));
    w.env.step(st, zoom(0, {700, 700, 800, 800}));
    w.env.step(st, view(qa.gt_pose));
    w.env.step(st, answer("wrong"));
    const Trajectory t = to_trajectory(st);
    EXPECT_EQ(replay_hashes(w.env, t), t.observation_hashes);
    const Trajectory back = trajectory_from_json(parse_json(to_json(t).dump()));
    EXPECT_EQ(back, t);
    EXPECT_EQ(replay_hashes(w.env, back), t.observation_hashes);
    EXPECT_FALSE(back.correct);
  }
}

TEST(Episode, ReadsStateAfterTermination) {
  const auto& w = shared_world();
  const QAItem& qa = first_item();
  EpisodeState st = w.env.start_episode(qa.scene_id, qa.qa_id);
  w.env.step(st, answer(qa.answer));
  EXPECT_TRUE(st.correct);
  EXPECT_EQ(st.tool_calls(), 0);
  EXPECT_THROW(w.env.step(st, zoom(0, {0, 0, 100, 100})), Error);
}

TEST(Episode, UnknownIdsAreNotFound) {
  const auto& w = shared_world();
  const QAItem& qa = first_item();
  try {
    w.env.start_episode("scene-missing", qa.qa_id);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NotFound);
  }
  try {
    w.env.start_episode(qa.scene_id, "nope");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NotFound);
  }
}

TEST(Episode, ConfigValidation) {
  EXPECT_THROW(Environment(EnvConfig{.step_budget = 0}), Error);
  EXPECT_THROW(Environment(EnvConfig{.fov = 120.0}), Error);
  EXPECT_NO_THROW(Environment(EnvConfig{.fov = 60.0}));
}

TEST(ToolCallJson, RoundTrip) {
  const std::vector<ToolCall> calls = {zoom(1, {1.5, 2.25, 300, 400.125}),
                                       view(CameraPose{{1.0, 2.0, 1.4}, 45.0, -10.0, 0.0}),
                                       answer("in the kitchen on floor 2")};
  for (const auto& c : calls) EXPECT_EQ(tool_call_from_json(parse_json(to_json(c).dump())), c);
}

}  // namespace
}  // namespace arena
