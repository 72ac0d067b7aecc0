#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "spatial_arena/error.hpp"
#include "spatial_arena/json_io.hpp"
#include "spatial_arena/renderer.hpp"

namespace arena {
namespace {

using testing::empty_room_scene;
using testing::generated_scene;
using testing::make_object;

// Resolves a referent by scanning every object.
std::vector<const SceneObject*> scan(const Scene& s, const Referent& r) {
  std::vector<const SceneObject*> out;
  for (const auto& o : s.objects) {
    if (o.class_name != r.class_name) continue;
    if (r.floor && o.floor_index != *r.floor) continue;
    if (r.room && s.find_room(o.room_id)->category != *r.room) continue;
    if (r.color && o.color != *r.color) continue;
    out.push_back(&o);
  }
  return out;
}

std::string scan_answer(const Scene& s, const QAItem& qa) {
  const auto hits = scan(s, qa.referent);
  if (qa.qtype == QuestionType::Counting) return std::to_string(hits.size());
  if (hits.size() != 1) return "<ambiguous>";
  const SceneObject& o = *hits[0];
  switch (qa.qtype) {
    case QuestionType::Position:
      return "in the " + std::string(display_name(s.find_room(o.room_id)->category)) + " on floor " +
             std::to_string(o.floor_index + 1);
    case QuestionType::Color: return std::string(to_string(o.color));
    case QuestionType::Material: return std::string(to_string(o.material));
    case QuestionType::Shape: return std::string(to_string(o.shape));
    case QuestionType::State: return std::string(to_string(o.state));
    default: return "";
  }
}

const std::vector<std::pair<const Scene*, std::vector<QAItem>>>& sample_sets() {
  static const auto sets = [] {
    std::vector<std::pair<const Scene*, std::vector<QAItem>>> out;
    for (std::uint64_t seed = 0; seed < 6; ++seed) {
      const Scene& s = generated_scene(200 + seed);
      out.emplace_back(&s, generate_qa(s, 40, seed));
    }
    return out;
  }();
  return sets;
}

TEST(QaGen, AnswersMatchScanOracle) {
  int n = 0;
  for (const auto& [scene, items] : sample_sets()) {
    for (const auto& qa : items) {
      EXPECT_EQ(qa.answer, scan_answer(*scene, qa)) << qa.qa_id << " " << qa.question;
      EXPECT_EQ(oracle_answer(*scene, qa), qa.answer);
      ++n;
    }
  }
  EXPECT_EQ(n, 240);
}

TEST(QaGen, GtBboxCoversTargets) {
  for (const auto& [scene, items] : sample_sets()) {
    for (const auto& qa : items) {
      const Rect fp = scene->floors[qa.gt_floor].footprint;
      const double sx = qa.bev_resolution / fp.width(), sy = qa.bev_resolution / fp.height();
      ASSERT_FALSE(qa.target_ids.empty());
      for (const auto& id : qa.target_ids) {
        const SceneObject* o = scene->find_object(id);
        ASSERT_NE(o, nullptr);
        EXPECT_EQ(o->floor_index, qa.gt_floor);
        const Rect r = o->aabb.footprint();
        EXPECT_LE(qa.gt_bbox.x_min, (r.x0 - fp.x0) * sx + 1e-6) << qa.qa_id;
        EXPECT_LE(qa.gt_bbox.y_min, (r.y0 - fp.y0) * sy + 1e-6) << qa.qa_id;
        EXPECT_GE(qa.gt_bbox.x_max, (r.x1 - fp.x0) * sx - 1e-6) << qa.qa_id;
        EXPECT_GE(qa.gt_bbox.y_max, (r.y1 - fp.y0) * sy - 1e-6) << qa.qa_id;
      }
      EXPECT_GE(qa.gt_bbox.x_min, 0.0);
      EXPECT_LE(qa.gt_bbox.x_max, qa.bev_resolution);
    }
  }
}

// Full-frame id buffer rather than the per-object ray subset used by generation.
TEST(QaGen, TargetsVisibleAtGtPose) {
  for (const auto& [scene, items] : sample_sets()) {
    for (std::size_t k = 0; k < items.size(); k += 3) {
      const QAItem& qa = items[k];
      const Raster r = render_view_raster(*scene, qa.gt_pose, kDefaultViewResolution);
      const auto hist = r.ids.histogram(scene->objects.size());
      for (const auto& id : qa.target_ids) {
        const auto idx = static_cast<std::size_t>(scene->find_object(id) - scene->objects.data());
        EXPECT_GE(hist[idx], 50) << qa.qa_id;
      }
      EXPECT_EQ(target_visibility(*scene, qa).size(), qa.target_ids.size());
    }
  }
}

TEST(QaGen, CountingQuestionsCountEveryInstance) {
  int counted = 0;
  for (const auto& [scene, items] : sample_sets()) {
    for (const auto& qa : items) {
      if (qa.qtype != QuestionType::Counting) continue;
      EXPECT_EQ(qa.target_ids.size(), scan(*scene, qa.referent).size());
      EXPECT_NE(qa.question.find(qa.referent.class_name), std::string::npos) << qa.question;
      EXPECT_NE(qa.question.find("floor " + std::to_string(qa.gt_floor + 1)), std::string::npos) << qa.question;
      ++counted;
    }
  }
  EXPECT_GT(counted, 5);
}

TEST(QaGen, SingleRedChair) {
  Scene s = empty_room_scene();
  s.objects.push_back(make_object("o0", "chair", {{7, 7, 0}, {7.5, 7.5, 0.9}}, Color::Red));
  s.objects.push_back(make_object("o1", "sofa", {{2, 2, 0}, {4, 3, 0.8}}, Color::Blue));
  QAItem qa;
  qa.qtype = QuestionType::Color;
  qa.referent = {"chair", 0, RoomCategory::Living, std::nullopt};
  EXPECT_EQ(oracle_answer(s, qa), "red");
  qa.qtype = QuestionType::Position;
  EXPECT_EQ(oracle_answer(s, qa), "in the living room on floor 1");
  qa.qtype = QuestionType::Counting;
  EXPECT_EQ(oracle_answer(s, qa), "1");
}

TEST(QaGen, Deterministic) {
  const Scene& s = generated_scene(200);
  const auto a = generate_qa(s, 25, 9);
  const auto b = generate_qa(s, 25, 9);
  EXPECT_EQ(a, b);
  EXPECT_NE(generate_qa(s, 25, 10), a);
}

TEST(QaGen, ErrorPaths) {
  const Scene empty = empty_room_scene();
  EXPECT_THROW(generate_qa(empty, 5, 1), Error);
  EXPECT_THROW(generate_qa(generated_scene(200), 0, 1), Error);
}

TEST(QaGen, TypeDistributionTracksWeights) {
  std::map<QuestionType, int> counts;
  int total = 0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    for (const auto& qa : generate_qa(generated_scene(300 + seed), 200, seed)) {
      ++counts[qa.qtype];
      ++total;
    }
  }
  for (std::size_t i = 0; i < kAllQuestionTypes.size(); ++i) {
    const double pct = 100.0 * counts[kAllQuestionTypes[i]] / total;
    EXPECT_NEAR(pct, kReferenceTypeDistribution[i], 3.0) << to_string(kAllQuestionTypes[i]);
  }
}

TEST(QaGen, TargetDistributionOverride) {
  QAOptions opts;
  opts.type_weights = parse_type_distribution("0,1,0,0,0,0");
  for (const auto& qa : generate_qa(generated_scene(201), 30, 4, opts)) EXPECT_EQ(qa.qtype, QuestionType::Color);
  EXPECT_THROW(parse_type_distribution("1,2,3"), Error);
  EXPECT_THROW(parse_type_distribution("0,0,0,0,0,0"), Error);
  EXPECT_THROW(parse_type_distribution("1,-1,1,1,1,1"), Error);
}

TEST(QaGen, UnsupportedTypeIsRedrawn) {
  Scene s = generated_scene(202);
  for (auto& o : s.objects) o.state = ObjectState::None;
  QAOptions opts;
  opts.type_weights = parse_type_distribution("0,1,0,0,0,1");
  const auto items = generate_qa(s, 20, 5, opts);
  EXPECT_EQ(items.size(), 20u);
  for (const auto& qa : items) EXPECT_EQ(qa.qtype, QuestionType::Color);
  opts.type_weights = parse_type_distribution("0,0,0,0,0,1");
  EXPECT_THROW(generate_qa(s, 1, 5, opts), Error);
}

TEST(QaJson, RoundTrip) {
  for (const auto& [scene, items] : sample_sets()) {
    for (const auto& qa : items) {
      const std::string text = canonical_dump(to_json(qa));
      const QAItem back = qa_from_json(parse_json(text));
      EXPECT_EQ(back, qa);
      EXPECT_EQ(canonical_dump(to_json(back)), text);
    }
  }
}

TEST(Match, Normalization) {
  QAItem qa;
  qa.qtype = QuestionType::Color;
  qa.answer = "red";
  EXPECT_TRUE(match_answer("Red ", qa));
  EXPECT_TRUE(match_answer("  RED", qa));
  EXPECT_FALSE(match_answer("crimson", qa));
  EXPECT_FALSE(match_answer("", qa));
  qa.qtype = QuestionType::Position;
  qa.answer = "in the living room on floor 2";
  EXPECT_TRUE(match_answer("In the  living room on floor 2", qa));
  EXPECT_FALSE(match_answer("living room", qa));
  EXPECT_FALSE(match_answer("in the living room on floor two", qa));
}

TEST(Match, NumberWords) {
  const char* words[] = {"zero", "one", "two", "three", "four", "five", "six", "seven", "eight", "nine", "ten",
                         "eleven", "twelve", "thirteen", "fourteen", "fifteen", "sixteen", "seventeen",
                         "eighteen", "nineteen", "twenty"};
  QAItem qa;
  qa.qtype = QuestionType::Counting;
  for (int n = 0; n <= 20; ++n) {
    qa.answer = std::to_string(n);
    EXPECT_EQ(parse_count(words[n]), n);
    EXPECT_TRUE(match_answer(words[n], qa)) << n;
    EXPECT_TRUE(match_answer(std::to_string(n), qa));
    EXPECT_FALSE(match_answer(std::to_string(n + 1), qa));
  }
  qa.answer = "3";
  EXPECT_TRUE(match_answer("Three ", qa));
  EXPECT_FALSE(match_answer("3 chairs", qa));
  EXPECT_FALSE(parse_count("many").has_value());
}

TEST(Filter, RejectionReasons) {
  const auto& [scene, items] = sample_sets()[0];
  std::vector<ReplayedItem> batch;
  QAItem good = items[0];
  batch.push_back({good, replay_answer(*scene, good)});

  QAItem hidden = items[1];
  hidden.qa_id = "hidden";
  hidden.gt_pose.yaw = wrap_yaw(hidden.gt_pose.yaw + 180.0);
  batch.push_back({hidden, hidden.answer});

  QAItem wrong = items[2];
  wrong.qa_id = "wrong";
  batch.push_back({wrong, "definitely not it"});

  const FilterResult r = quality_filter(*scene, batch);
  ASSERT_EQ(r.kept.size(), 1u);
  EXPECT_EQ(r.kept[0], good);
  ASSERT_EQ(r.rejected.size(), 2u);
  EXPECT_EQ(r.rejected[0].qa_id, "hidden");
  EXPECT_EQ(r.rejected[0].reason, "visibility");
  EXPECT_EQ(r.rejected[1].reason, "inconsistent");
}

TEST(Filter, TwoChairsIsAmbiguous) {
  Scene s = empty_room_scene();
  s.objects.push_back(make_object("o0", "chair", {{7, 7, 0}, {7.5, 7.5, 0.9}}, Color::Red));
  s.objects.push_back(make_object("o1", "chair", {{9, 7, 0}, {9.5, 7.5, 0.9}}, Color::Green));
  QAItem qa;
  qa.qa_id = "q";
  qa.scene_id = s.scene_id;
  qa.qtype = QuestionType::Color;
  qa.answer = "red";
  qa.referent = {"chair", 0, RoomCategory::Living, std::nullopt};
  qa.target_ids = {"o0"};
  qa.gt_pose = CameraPose{{4.0, 7.25, 1.4}, 0.0, -20.0};
  const auto r = quality_filter(s, {{qa, "red"}});
  ASSERT_EQ(r.rejected.size(), 1u);
  EXPECT_EQ(r.rejected[0].reason, "ambiguous");
  EXPECT_FALSE(oracle_answer(s, qa).has_value());
}

TEST(Filter, ReplayReproducesGeneratedAnswers) {
  for (const auto& [scene, items] : sample_sets()) {
    std::vector<ReplayedItem> batch;
    for (const auto& qa : items) batch.push_back({qa, replay_answer(*scene, qa)});
    const auto r = quality_filter(*scene, batch);
    EXPECT_EQ(r.kept.size(), items.size());
  }
}

TEST(Stats, FractionsSumToOne) {
  std::vector<QAItem> all;
  for (const auto& [scene, items] : sample_sets()) all.insert(all.end(), items.begin(), items.end());
  const QASetStats st = qa_stats(all, {{"x", "visibility"}});
  double sum = 0.0;
  for (const auto& [_, f] : st.fractions) sum += f;
  EXPECT_NEAR(sum, 1.0, 1e-12);
  EXPECT_EQ(st.total, static_cast<int>(all.size()));
  EXPECT_EQ(st.scenes, 6);
  EXPECT_EQ(st.rejections.at("visibility"), 1);
}

TEST(Types, StringsRoundTrip) {
  for (auto t : kAllQuestionTypes) EXPECT_EQ(parse_question_type(to_string(t)), t);
  EXPECT_EQ(parse_question_type("relation"), QuestionType::Position);
  EXPECT_THROW(parse_question_type("size"), Error);
}

}  // namespace
}  // namespace arena
