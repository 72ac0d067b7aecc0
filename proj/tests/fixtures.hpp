#pragma once

#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "spatial_arena/episode.hpp"
#include "spatial_arena/qa.hpp"
#include "spatial_arena/scene.hpp"

namespace arena::testing {

// One floor, one 16x16 m living room, no doors.
inline Scene empty_room_scene(double size = 16.0) {
  Scene s;
  s.scene_id = "scene-test";
  Floor f;
  f.index = 0;
  f.footprint = {0.0, 0.0, size, size};
  f.elevation_z = 0.0;
  f.rooms.push_back(Room{"f0r0", RoomCategory::Living, f.footprint, {}});
  s.floors.push_back(f);
  s.total_area = size * size;
  return s;
}

inline SceneObject make_object(std::string id, std::string cls, Box3 box, Color color,
                               Material m = Material::Wood, Shape sh = Shape::Rectangular,
                               ObjectState st = ObjectState::None, std::string room = "f0r0", int floor = 0) {
  SceneObject o;
  o.object_id = std::move(id);
  o.class_name = std::move(cls);
  o.room_id = std::move(room);
  o.aabb = box;
  o.color = color;
  o.material = m;
  o.shape = sh;
  o.state = st;
  o.floor_index = floor;
  return o;
}

// Generated scenes are expensive enough to share across tests.
inline const Scene& generated_scene(std::uint64_t seed) {
  static std::mutex mu;
  static std::map<std::uint64_t, Scene> cache;
  std::lock_guard lock(mu);
  auto it = cache.find(seed);
  if (it == cache.end()) it = cache.emplace(seed, generate_scene(seed)).first;
  return it->second;
}

// Slab test written out per axis, no shared code with the renderer.
inline std::optional<double> brute_ray_box(const Vec3& o, const Vec3& d, const Box3& b) {
  double lo = -std::numeric_limits<double>::infinity();
  double hi = std::numeric_limits<double>::infinity();
  const double os[3] = {o.x, o.y, o.z}, ds[3] = {d.x, d.y, d.z};
  const double mins[3] = {b.min.x, b.min.y, b.min.z}, maxs[3] = {b.max.x, b.max.y, b.max.z};
  for (int a = 0; a < 3; ++a) {
    if (ds[a] == 0.0) {
      if (os[a] < mins[a] || os[a] > maxs[a]) return std::nullopt;
      continue;
    }
    double t0 = (mins[a] - os[a]) / ds[a];
    double t1 = (maxs[a] - os[a]) / ds[a];
    if (t0 > t1) std::swap(t0, t1);
    lo = std::max(lo, t0);
    hi = std::min(hi, t1);
  }
  if (hi < lo || hi <= 1e-9) return std::nullopt;
  return lo > 1e-9 ? lo : std::optional<double>{};
}

// Pixel-grid IoU at `step` resolution.
inline double grid_iou(const BBox2D& a, const BBox2D& b, double step) {
  const double x0 = std::min(a.x_min, b.x_min), x1 = std::max(a.x_max, b.x_max);
  const double y0 = std::min(a.y_min, b.y_min), y1 = std::max(a.y_max, b.y_max);
  long inter = 0, uni = 0;
  for (double y = y0 + step / 2; y < y1; y += step) {
    for (double x = x0 + step / 2; x < x1; x += step) {
      const bool in_a = x >= a.x_min && x < a.x_max && y >= a.y_min && y < a.y_max;
      const bool in_b = x >= b.x_min && x < b.x_max && y >= b.y_min && y < b.y_max;
      inter += in_a && in_b;
      uni += in_a || in_b;
    }
  }
  return uni ? static_cast<double>(inter) / static_cast<double>(uni) : 0.0;
}

// Small environment with generated scenes and quality-filtered QA.
struct World {
  Environment env;
  std::vector<QAItem> items;
};

inline World make_world(int scenes, int per_scene, std::uint64_t seed, EnvConfig cfg = {}) {
  World w{Environment(cfg), {}};
  for (int i = 0; i < scenes; ++i) {
    const Scene& scene = generated_scene(seed + static_cast<std::uint64_t>(i));
    auto items = generate_qa(scene, per_scene, seed * 31 + static_cast<std::uint64_t>(i));
    std::vector<ReplayedItem> replayed;
    for (auto& qa : items) replayed.push_back({qa, replay_answer(scene, qa)});
    auto filtered = quality_filter(scene, replayed);
    w.env.add_scene(scene);
    for (auto& qa : filtered.kept) {
      w.env.add_qa(qa);
      w.items.push_back(qa);
    }
  }
  return w;
}

inline const World& shared_world() {
  static const World w = make_world(4, 12, 101);
  return w;
}

}  // namespace arena::testing
