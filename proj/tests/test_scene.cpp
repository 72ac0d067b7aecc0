#include <gtest/gtest.h>

#include <functional>
#include <numeric>
#include <set>

#include "fixtures.hpp"
#include "spatial_arena/error.hpp"
#include "spatial_arena/json_io.hpp"
#include "spatial_arena/rng.hpp"

namespace arena {
namespace {

using testing::generated_scene;

// Union-find over rooms: doors join rooms, stacked stairwells join floors.
bool connected_by_union_find(const Scene& s) {
  std::map<std::string, std::string> parent;
  std::function<std::string(const std::string&)> find = [&](const std::string& x) {
    return parent[x] == x ? x : parent[x] = find(parent[x]);
  };
  auto join = [&](const std::string& a, const std::string& b) { parent[find(a)] = find(b); };
  for (const auto& f : s.floors)
    for (const auto& r : f.rooms) parent[r.room_id] = r.room_id;
  for (const auto& f : s.floors) {
    for (const auto& r : f.rooms) {
      for (const auto& d : r.door_edges)
        if (!d.other_room.empty() && parent.count(d.other_room)) join(r.room_id, d.other_room);
    }
  }
  for (std::size_t i = 0; i + 1 < s.floors.size(); ++i) {
    for (const auto& a : s.floors[i].rooms)
      for (const auto& b : s.floors[i + 1].rooms)
        if (a.category == RoomCategory::Stairwell && b.category == RoomCategory::Stairwell && a.rect == b.rect)
          join(a.room_id, b.room_id);
  }
  std::set<std::string> roots;
  for (auto& [id, _] : parent) roots.insert(find(id));
  return roots.size() == 1;
}

TEST(SceneGen, DefaultProfileBounds) {
  for (std::uint64_t seed = 0; seed < 12; ++seed) {
    const Scene& s = generated_scene(seed);
    EXPECT_GE(s.floor_count(), 1);
    EXPECT_LE(s.floor_count(), 3);
    EXPECT_GE(s.room_count(), 10) << seed;
    EXPECT_LE(s.room_count(), 20) << seed;
    EXPECT_GT(s.total_area, 300.0) << seed;
    for (const auto& f : s.floors) EXPECT_GE(f.rooms.size(), 3u);
  }
}

TEST(SceneGen, RoomsPartitionTheirFloor) {
  for (std::uint64_t seed = 20; seed < 30; ++seed) {
    const Scene& s = generated_scene(seed);
    for (const auto& f : s.floors) {
      double sum = 0.0;
      for (std::size_t i = 0; i < f.rooms.size(); ++i) {
        const Rect& a = f.rooms[i].rect;
        EXPECT_TRUE(f.footprint.contains(a));
        sum += a.area();
        for (std::size_t j = i + 1; j < f.rooms.size(); ++j) {
          EXPECT_LT(intersection(a, f.rooms[j].rect).area(), 1e-9);
        }
      }
      // Rooms leave only the wall gaps between them uncovered.
      EXPECT_LE(sum, f.footprint.area() + 1e-6);
      EXPECT_GT(sum, 0.95 * f.footprint.area());
    }
  }
}

TEST(SceneGen, ReachabilityMatchesUnionFind) {
  for (std::uint64_t seed = 40; seed < 60; ++seed) {
    const Scene& s = generated_scene(seed);
    EXPECT_TRUE(connected_by_union_find(s)) << seed;
    EXPECT_TRUE(all_rooms_reachable(s)) << seed;
  }
}

TEST(SceneGen, DoorsAreSymmetric) {
  const Scene& s = generated_scene(3);
  for (const auto& f : s.floors) {
    for (const auto& r : f.rooms) {
      for (const auto& d : r.door_edges) {
        if (d.other_room.empty()) continue;
        const Room* o = s.find_room(d.other_room);
        ASSERT_NE(o, nullptr);
        EXPECT_TRUE(std::ranges::any_of(o->door_edges, [&](const DoorEdge& e) { return e.other_room == r.room_id; }));
      }
    }
  }
}

TEST(SceneGen, ObjectsRestInsideTheirRoom) {
  for (std::uint64_t seed = 0; seed < 8; ++seed) {
    const Scene& s = generated_scene(seed);
    for (std::size_t i = 0; i < s.objects.size(); ++i) {
      const SceneObject& o = s.objects[i];
      const Room* room = s.find_room(o.room_id);
      ASSERT_NE(room, nullptr);
      EXPECT_TRUE(room->rect.contains(o.aabb.footprint())) << o.object_id;
      EXPECT_DOUBLE_EQ(o.aabb.min.z, s.floors[o.floor_index].elevation_z);
      ASSERT_NE(find_object_class(o.class_name), nullptr);
      for (std::size_t j = i + 1; j < s.objects.size(); ++j) {
        EXPECT_LE(penetration(o.aabb, s.objects[j].aabb), 1e-9) << o.object_id << " " << s.objects[j].object_id;
      }
    }
    EXPECT_TRUE(std::ranges::is_sorted(s.objects, {}, &SceneObject::object_id));
  }
}

TEST(SceneGen, AttributesComeFromTheVocabulary) {
  const Scene& s = generated_scene(5);
  for (const auto& o : s.objects) {
    const ObjectClassInfo* info = find_object_class(o.class_name);
    ASSERT_NE(info, nullptr);
    EXPECT_TRUE(std::ranges::count(info->colors, o.color));
    EXPECT_TRUE(std::ranges::count(info->materials, o.material));
    EXPECT_TRUE(std::ranges::count(info->shapes, o.shape));
    EXPECT_TRUE(std::ranges::count(info->states, o.state));
  }
}

TEST(SceneGen, Deterministic) {
  EXPECT_EQ(serialize_scene(generate_scene(77)), serialize_scene(generate_scene(77)));
  EXPECT_NE(generate_scene(77).scene_id, generate_scene(78).scene_id);
}

TEST(SceneGen, SingleFloorProfile) {
  GeneratorProfile p;
  p.floor_count = {1, 1};
  p.total_rooms = {10, 12};
  p.rooms_per_floor = {10, 12};
  const Scene s = generate_scene(9, p);
  EXPECT_EQ(s.floor_count(), 1);
  EXPECT_GE(s.room_count(), 10);
}

TEST(SceneGen, RejectsBadProfiles) {
  GeneratorProfile p;
  p.floor_count = {3, 1};
  EXPECT_THROW(generate_scene(1, p), Error);
  GeneratorProfile q;
  q.rooms_per_floor = {1, 2};
  EXPECT_THROW(q.validate(), Error);
  GeneratorProfile r;
  r.color_weights = {1.0};
  EXPECT_THROW(r.validate(), Error);
}

TEST(SceneJson, RoundTripIsExact) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const Scene& s = generated_scene(seed);
    const std::string text = serialize_scene(s);
    const Scene back = deserialize_scene(text);
    EXPECT_EQ(back, s);
    EXPECT_EQ(serialize_scene(back), text);
  }
}

TEST(SceneJson, MalformedInputThrows) {
  EXPECT_THROW(deserialize_scene("{"), Error);
  EXPECT_THROW(deserialize_scene("{\"scene_id\": 3}"), Error);
}

TEST(Query, MatchesLinearScan) {
  const Scene& s = generated_scene(11);
  Rng rng(5);
  for (int trial = 0; trial < 300; ++trial) {
    ObjectFilter f;
    const SceneObject& pick = s.objects[rng.uniform_int(0, static_cast<int>(s.objects.size()) - 1)];
    if (rng.bernoulli(0.7)) f.class_name = pick.class_name;
    if (rng.bernoulli(0.5)) f.floor = pick.floor_index;
    if (rng.bernoulli(0.3)) f.room_id = pick.room_id;
    if (rng.bernoulli(0.4)) f.color = pick.color;
    if (rng.bernoulli(0.2)) f.material = kAllMaterials[rng.uniform_int(0, 7)];
    if (rng.bernoulli(0.2)) f.shape = pick.shape;
    if (rng.bernoulli(0.2)) f.state = pick.state;
    if (rng.bernoulli(0.2)) f.room_category = s.find_room(pick.room_id)->category;

    std::vector<std::string> expected;
    for (const auto& o : s.objects) {
      const Room* room = s.find_room(o.room_id);
      if (f.class_name && o.class_name != *f.class_name) continue;
      if (f.floor && o.floor_index != *f.floor) continue;
      if (f.room_id && o.room_id != *f.room_id) continue;
      if (f.room_category && room->category != *f.room_category) continue;
      if (f.color && o.color != *f.color) continue;
      if (f.material && o.material != *f.material) continue;
      if (f.shape && o.shape != *f.shape) continue;
      if (f.state && o.state != *f.state) continue;
      expected.push_back(o.object_id);
    }
    std::vector<std::string> got;
    for (const auto* o : query_objects(s, f)) got.push_back(o->object_id);
    EXPECT_EQ(got, expected);
  }
}

TEST(Bev, MappingRoundTrip) {
  const Scene& s = generated_scene(2);
  Rng rng(1);
  for (int f = 0; f < s.floor_count(); ++f) {
    const Rect fp = s.floors[f].footprint;
    for (int i = 0; i < 100; ++i) {
      const Vec2 w{rng.uniform(fp.x0, fp.x1), rng.uniform(fp.y0, fp.y1)};
      const Vec2 px = world_to_bev(s, f, w);
      EXPECT_GE(px.x, 0.0);
      EXPECT_LE(px.x, 512.0);
      const Vec2 back = bev_to_world(s, f, px);
      EXPECT_NEAR(back.x, w.x, 1e-9);
      EXPECT_NEAR(back.y, w.y, 1e-9);
    }
  }
  EXPECT_THROW(world_to_bev(s, 0, {s.floors[0].footprint.x1 + 5.0, 0.0}), Error);
  EXPECT_THROW(world_to_bev(s, 7, {0.0, 0.0}), Error);
}

TEST(Bev, SquareFootprintScale) {
  const Scene s = testing::empty_room_scene(16.0);
  const Vec2 c = world_to_bev(s, 0, {8.0, 8.0});
  EXPECT_NEAR(c.x, 256.0, 1e-9);
  EXPECT_NEAR(c.y, 256.0, 1e-9);
  EXPECT_NEAR(bev_mapping(s, 0).pixel_size().x, 16.0 / 512.0, 1e-12);
}

TEST(Enums, StringsRoundTrip) {
  for (auto c : kAllColors) EXPECT_EQ(parse_color(to_string(c)), c);
  for (auto m : kAllMaterials) EXPECT_EQ(parse_material(to_string(m)), m);
  for (auto sh : kAllShapes) EXPECT_EQ(parse_shape(to_string(sh)), sh);
  for (auto st : kAllStates) EXPECT_EQ(parse_state(to_string(st)), st);
  for (auto r : kAllRoomCategories) EXPECT_EQ(parse_room_category(to_string(r)), r);
  EXPECT_THROW(parse_color("crimson"), Error);
}

TEST(Rng, DeriveSeedSeparatesStreams) {
  EXPECT_NE(derive_seed(1, 0), derive_seed(1, 1));
  EXPECT_NE(derive_seed(1, "a"), derive_seed(1, "b"));
  EXPECT_EQ(derive_seed(9, "scene-x"), derive_seed(9, "scene-x"));
  Rng a(3), b(3);
  for (int i = 0; i < 10; ++i) EXPECT_EQ(a.uniform(0.0, 1.0), b.uniform(0.0, 1.0));
}

}  // namespace
}  // namespace arena
