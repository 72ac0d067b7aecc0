#include "spatial_arena/scene.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <fmt/format.h>
#include <map>

#include "spatial_arena/error.hpp"
#include "spatial_arena/rng.hpp"

namespace arena {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::GenerationFailed: return "GenerationFailed";
    case ErrorCode::NotFound: return "NotFound";
    case ErrorCode::InvalidRegion: return "InvalidRegion";
    case ErrorCode::PoseOutOfBounds: return "PoseOutOfBounds";
    case ErrorCode::ProtocolError: return "ProtocolError";
    case ErrorCode::Io: return "Io";
  }
  return "Unknown";
}

namespace {

template <typename E, std::size_t N>
E parse_enum(std::string_view s, const std::array<E, N>& all, std::string_view what) {
  for (E e : all) {
    if (to_string(e) == s) return e;
  }
  throw Error(ErrorCode::InvalidArgument, fmt::format("unknown {} '{}'", what, s));
}

double quantize(double x) { return std::round(x * 1e4) / 1e4; }
double snap(double x, double step) { return quantize(std::round(x / step) * step); }

}  // namespace

std::string_view to_string(RoomCategory c) {
  switch (c) {
    case RoomCategory::Bedroom: return "bedroom";
    case RoomCategory::Kitchen: return "kitchen";
    case RoomCategory::Bathroom: return "bathroom";
    case RoomCategory::Living: return "living";
    case RoomCategory::Hallway: return "hallway";
    case RoomCategory::Stairwell: return "stairwell";
    case RoomCategory::Office: return "office";
    case RoomCategory::Storage: return "storage";
  }
  return "?";
}

std::string_view display_name(RoomCategory c) {
  switch (c) {
    case RoomCategory::Living: return "living room";
    case RoomCategory::Storage: return "storage room";
    default: return to_string(c);
  }
}

std::string_view to_string(Color c) {
  switch (c) {
    case Color::Red: return "red";
    case Color::Orange: return "orange";
    case Color::Yellow: return "yellow";
    case Color::Green: return "green";
    case Color::Blue: return "blue";
    case Color::Purple: return "purple";
    case Color::Pink: return "pink";
    case Color::Brown: return "brown";
    case Color::Black: return "black";
    case Color::White: return "white";
    case Color::Gray: return "gray";
    case Color::Beige: return "beige";
  }
  return "?";
}

std::string_view to_string(Material m) {
  switch (m) {
    case Material::Wood: return "wood";
    case Material::Metal: return "metal";
    case Material::Fabric: return "fabric";
    case Material::Glass: return "glass";
    case Material::Plastic: return "plastic";
    case Material::Ceramic: return "ceramic";
    case Material::Leather: return "leather";
    case Material::Stone: return "stone";
  }
  return "?";
}

std::string_view to_string(Shape s) {
  switch (s) {
    case Shape::Rectangular: return "rectangular";
    case Shape::Round: return "round";
    case Shape::LShaped: return "l-shaped";
    case Shape::Cylindrical: return "cylindrical";
    case Shape::Irregular: return "irregular";
  }
  return "?";
}

std::string_view to_string(ObjectState s) {
  switch (s) {
    case ObjectState::Open: return "open";
    case ObjectState::Closed: return "closed";
    case ObjectState::On: return "on";
    case ObjectState::Off: return "off";
    case ObjectState::Folded: return "folded";
    case ObjectState::Unfolded: return "unfolded";
    case ObjectState::None: return "none";
  }
  return "?";
}

RoomCategory parse_room_category(std::string_view s) {
  return parse_enum(s, kAllRoomCategories, "room category");
}
Color parse_color(std::string_view s) { return parse_enum(s, kAllColors, "color"); }
Material parse_material(std::string_view s) { return parse_enum(s, kAllMaterials, "material"); }
Shape parse_shape(std::string_view s) { return parse_enum(s, kAllShapes, "shape"); }
ObjectState parse_state(std::string_view s) { return parse_enum(s, kAllStates, "state"); }

const std::vector<ObjectClassInfo>& object_vocabulary() {
  using RC = RoomCategory;
  using C = Color;
  using M = Material;
  using S = Shape;
  using St = ObjectState;
  static const std::vector<ObjectClassInfo> vocab = {
      {"bed", {RC::Bedroom}, {1.4, 1.9}, {1.9, 2.1}, {0.5, 0.7},
       {C::White, C::Gray, C::Blue, C::Beige, C::Brown, C::Pink}, {M::Wood, M::Fabric, M::Metal},
       {S::Rectangular}, {St::None}},
      {"nightstand", {RC::Bedroom}, {0.4, 0.55}, {0.35, 0.5}, {0.45, 0.65},
       {C::White, C::Brown, C::Black, C::Gray}, {M::Wood, M::Plastic}, {S::Rectangular},
       {St::None}},
      {"wardrobe", {RC::Bedroom, RC::Hallway}, {1.0, 1.8}, {0.55, 0.65}, {1.8, 2.2},
       {C::White, C::Brown, C::Gray, C::Beige}, {M::Wood, M::Metal}, {S::Rectangular},
       {St::Open, St::Closed}},
      {"dresser", {RC::Bedroom}, {0.8, 1.4}, {0.4, 0.55}, {0.7, 1.0},
       {C::White, C::Brown, C::Black}, {M::Wood}, {S::Rectangular}, {St::None}},
      {"desk", {RC::Office, RC::Bedroom}, {1.0, 1.6}, {0.55, 0.8}, {0.72, 0.78},
       {C::White, C::Brown, C::Black, C::Gray}, {M::Wood, M::Metal, M::Glass},
       {S::Rectangular, S::LShaped}, {St::None}},
      {"chair", {RC::Kitchen, RC::Office, RC::Living, RC::Bedroom}, {0.42, 0.55}, {0.42, 0.55},
       {0.8, 1.0}, {C::Red, C::Black, C::White, C::Brown, C::Blue, C::Green, C::Gray, C::Yellow},
       {M::Wood, M::Metal, M::Plastic, M::Fabric}, {S::Rectangular, S::Round}, {St::None}},
      {"office chair", {RC::Office}, {0.55, 0.7}, {0.55, 0.7}, {0.95, 1.2},
       {C::Black, C::Gray, C::Blue, C::Red}, {M::Fabric, M::Leather, M::Plastic}, {S::Irregular},
       {St::None}},
      {"bookshelf", {RC::Office, RC::Living}, {0.6, 1.2}, {0.28, 0.4}, {1.5, 2.1},
       {C::White, C::Brown, C::Black}, {M::Wood, M::Metal}, {S::Rectangular}, {St::None}},
      {"sofa", {RC::Living}, {1.6, 2.4}, {0.8, 1.0}, {0.75, 0.9},
       {C::Gray, C::Beige, C::Blue, C::Green, C::Brown, C::Red, C::Black},
       {M::Fabric, M::Leather}, {S::Rectangular, S::LShaped}, {St::None}},
      {"armchair", {RC::Living}, {0.7, 0.9}, {0.7, 0.9}, {0.8, 1.0},
       {C::Gray, C::Beige, C::Blue, C::Green, C::Brown, C::Red, C::Yellow},
       {M::Fabric, M::Leather}, {S::Round, S::Rectangular}, {St::None}},
      {"coffee table", {RC::Living}, {0.8, 1.2}, {0.5, 0.7}, {0.38, 0.48},
       {C::Brown, C::White, C::Black}, {M::Wood, M::Glass, M::Stone}, {S::Rectangular, S::Round},
       {St::None}},
      {"tv", {RC::Living, RC::Bedroom}, {0.9, 1.5}, {0.25, 0.4}, {0.9, 1.3}, {C::Black, C::Gray},
       {M::Plastic, M::Metal}, {S::Rectangular}, {St::On, St::Off}},
      {"lamp", {RC::Living, RC::Bedroom, RC::Office}, {0.3, 0.45}, {0.3, 0.45}, {1.2, 1.7},
       {C::White, C::Black, C::Yellow, C::Orange, C::Beige}, {M::Metal, M::Glass, M::Ceramic},
       {S::Cylindrical, S::Round}, {St::On, St::Off}},
      {"rug", {RC::Living, RC::Bedroom, RC::Hallway}, {1.2, 2.0}, {0.8, 1.4}, {0.01, 0.02},
       {C::Red, C::Blue, C::Beige, C::Gray, C::Green, C::Purple, C::Orange}, {M::Fabric},
       {S::Rectangular, S::Round}, {St::None}},
      {"plant", {RC::Living, RC::Hallway, RC::Office}, {0.35, 0.6}, {0.35, 0.6}, {0.6, 1.5},
       {C::Green}, {M::Ceramic, M::Plastic}, {S::Irregular}, {St::None}},
      {"dining table", {RC::Kitchen, RC::Living}, {1.2, 1.8}, {0.8, 1.0}, {0.72, 0.78},
       {C::Brown, C::White, C::Black}, {M::Wood, M::Glass, M::Stone}, {S::Rectangular, S::Round},
       {St::None}},
      {"refrigerator", {RC::Kitchen}, {0.6, 0.9}, {0.6, 0.75}, {1.7, 2.0},
       {C::White, C::Gray, C::Black}, {M::Metal}, {S::Rectangular}, {St::Open, St::Closed}},
      {"stove", {RC::Kitchen}, {0.6, 0.9}, {0.6, 0.65}, {0.85, 0.92}, {C::White, C::Black, C::Gray},
       {M::Metal}, {S::Rectangular}, {St::On, St::Off}},
      {"sink", {RC::Kitchen, RC::Bathroom}, {0.5, 0.9}, {0.45, 0.6}, {0.85, 0.92},
       {C::White, C::Gray}, {M::Ceramic, M::Metal, M::Stone}, {S::Rectangular, S::Round},
       {St::None}},
      {"cabinet", {RC::Kitchen, RC::Bathroom, RC::Storage}, {0.6, 1.2}, {0.4, 0.6}, {0.8, 2.0},
       {C::White, C::Brown, C::Gray, C::Blue, C::Green}, {M::Wood, M::Metal}, {S::Rectangular},
       {St::Open, St::Closed}},
      {"microwave", {RC::Kitchen}, {0.45, 0.55}, {0.35, 0.42}, {0.28, 0.32},
       {C::White, C::Black, C::Gray}, {M::Metal, M::Plastic}, {S::Rectangular},
       {St::Open, St::Closed}},
      {"dishwasher", {RC::Kitchen}, {0.58, 0.62}, {0.58, 0.62}, {0.82, 0.86},
       {C::White, C::Gray, C::Black}, {M::Metal}, {S::Rectangular}, {St::Open, St::Closed}},
      {"toilet", {RC::Bathroom}, {0.38, 0.45}, {0.6, 0.72}, {0.7, 0.8}, {C::White, C::Beige},
       {M::Ceramic}, {S::Irregular, S::Round}, {St::None}},
      {"bathtub", {RC::Bathroom}, {0.7, 0.85}, {1.5, 1.8}, {0.5, 0.6}, {C::White, C::Beige},
       {M::Ceramic, M::Stone}, {S::Rectangular, S::Round}, {St::None}},
      {"shower", {RC::Bathroom}, {0.8, 1.0}, {0.8, 1.0}, {2.0, 2.2}, {C::White, C::Gray},
       {M::Glass, M::Ceramic}, {S::Rectangular}, {St::Open, St::Closed}},
      {"towel", {RC::Bathroom}, {0.3, 0.5}, {0.2, 0.35}, {0.05, 0.15},
       {C::White, C::Blue, C::Pink, C::Yellow, C::Green, C::Purple}, {M::Fabric}, {S::Rectangular},
       {St::Folded, St::Unfolded}},
      {"washing machine", {RC::Bathroom, RC::Storage}, {0.58, 0.62}, {0.55, 0.62}, {0.82, 0.88},
       {C::White, C::Gray}, {M::Metal, M::Plastic}, {S::Rectangular}, {St::On, St::Off}},
      {"shelf", {RC::Storage, RC::Office}, {0.8, 1.4}, {0.3, 0.45}, {1.2, 2.0},
       {C::Gray, C::Brown, C::White, C::Black}, {M::Metal, M::Wood}, {S::Rectangular}, {St::None}},
      {"box", {RC::Storage}, {0.35, 0.7}, {0.3, 0.6}, {0.3, 0.6}, {C::Brown, C::White, C::Blue},
       {M::Plastic, M::Wood}, {S::Rectangular}, {St::Open, St::Closed}},
      {"laundry basket", {RC::Storage, RC::Bathroom}, {0.4, 0.55}, {0.35, 0.45}, {0.45, 0.6},
       {C::White, C::Blue, C::Gray, C::Beige}, {M::Plastic, M::Fabric}, {S::Cylindrical, S::Rectangular},
       {St::None}},
      {"bench", {RC::Hallway}, {0.9, 1.4}, {0.35, 0.45}, {0.42, 0.5},
       {C::Brown, C::Black, C::White, C::Gray}, {M::Wood, M::Metal, M::Stone}, {S::Rectangular},
       {St::None}},
      {"shoe rack", {RC::Hallway}, {0.6, 1.0}, {0.28, 0.35}, {0.5, 1.0},
       {C::Brown, C::White, C::Black}, {M::Wood, M::Metal}, {S::Rectangular}, {St::None}},
      {"coat rack", {RC::Hallway}, {0.35, 0.45}, {0.35, 0.45}, {1.7, 1.9},
       {C::Black, C::Brown, C::White}, {M::Metal, M::Wood}, {S::Cylindrical}, {St::None}},
      {"mirror", {RC::Bathroom, RC::Hallway}, {0.5, 1.0}, {0.05, 0.1}, {1.2, 1.8},
       {C::White, C::Gray, C::Brown, C::Black}, {M::Glass}, {S::Rectangular, S::Round},
       {St::None}},
      {"laptop", {RC::Office}, {0.32, 0.4}, {0.22, 0.28}, {0.02, 0.3}, {C::Gray, C::Black, C::White},
       {M::Metal, M::Plastic}, {S::Rectangular}, {St::Open, St::Closed}},
      {"blanket", {RC::Bedroom}, {0.4, 0.6}, {0.3, 0.5}, {0.1, 0.25},
       {C::Red, C::Blue, C::Beige, C::Gray, C::Pink, C::Purple, C::Green}, {M::Fabric},
       {S::Rectangular}, {St::Folded, St::Unfolded}},
      {"vase", {RC::Living, RC::Hallway}, {0.2, 0.3}, {0.2, 0.3}, {0.4, 0.8},
       {C::Blue, C::White, C::Red, C::Green, C::Yellow, C::Purple}, {M::Ceramic, M::Glass},
       {S::Cylindrical, S::Round}, {St::None}},
      {"stool", {RC::Kitchen}, {0.35, 0.42}, {0.35, 0.42}, {0.6, 0.75},
       {C::Black, C::Brown, C::Red, C::White, C::Orange}, {M::Wood, M::Metal, M::Plastic},
       {S::Round, S::Cylindrical}, {St::None}},
      {"trash can", {RC::Kitchen, RC::Office}, {0.3, 0.4}, {0.3, 0.4}, {0.4, 0.65},
       {C::Gray, C::Black, C::White, C::Green}, {M::Metal, M::Plastic}, {S::Cylindrical},
       {St::None}},
  };
  return vocab;
}

const ObjectClassInfo* find_object_class(std::string_view name) {
  for (const auto& info : object_vocabulary()) {
    if (info.name == name) return &info;
  }
  return nullptr;
}

int Scene::room_count() const {
  int n = 0;
  for (const auto& f : floors) n += static_cast<int>(f.rooms.size());
  return n;
}

const Room* Scene::find_room(std::string_view room_id) const {
  for (const auto& f : floors) {
    for (const auto& r : f.rooms) {
      if (r.room_id == room_id) return &r;
    }
  }
  return nullptr;
}

const SceneObject* Scene::find_object(std::string_view object_id) const {
  auto it = std::lower_bound(objects.begin(), objects.end(), object_id,
                             [](const SceneObject& o, std::string_view id) { return o.object_id < id; });
  if (it != objects.end() && it->object_id == object_id) return &*it;
  return nullptr;
}

void GeneratorProfile::validate() const {
  auto fail = [](std::string_view msg) {
    throw Error(ErrorCode::InvalidArgument, fmt::format("invalid generator profile: {}", msg));
  };
  if (!floor_count.valid() || floor_count.min < 1) fail("floor_count");
  if (!total_rooms.valid() || total_rooms.min < 1) fail("total_rooms");
  if (!rooms_per_floor.valid() || rooms_per_floor.min < 3) fail("rooms_per_floor (min 3)");
  if (!objects_per_room.valid() || objects_per_room.min < 0) fail("objects_per_room");
  if (!footprint_width.valid() || !footprint_depth.valid()) fail("footprint range");
  if (min_room_width <= 0.0) fail("min_room_width");
  if (footprint_width.min < 3.0 + 2.0 * min_room_width) fail("footprint_width too small");
  if (footprint_depth.min < 4.0 + min_room_width) fail("footprint_depth too small");
  auto positive = [](const std::vector<double>& w, std::size_t n) {
    return w.size() == n && std::ranges::all_of(w, [](double x) { return x > 0.0; });
  };
  if (!positive(color_weights, kAllColors.size())) fail("color_weights");
  if (!positive(material_weights, kAllMaterials.size())) fail("material_weights");
  if (!positive(shape_weights, kAllShapes.size())) fail("shape_weights");
  if (max_retries < 1) fail("max_retries");
  if (floor_count.max * rooms_per_floor.max < total_rooms.min ||
      floor_count.min * rooms_per_floor.min > total_rooms.max) {
    fail("room ranges cannot be satisfied");
  }
}

namespace {

struct PartitionFailure {};

struct CellDoor {
  std::size_t a;
  std::size_t b;
  Vec2 p0;
  Vec2 p1;
};

struct Partition {
  std::vector<Rect> cells;
  std::vector<CellDoor> doors;
};

constexpr double kGrid = 0.05;
constexpr double kDoorWidth = 0.9;

// Adds the door with the longest shared wall between cells [a0,a1) and [b0,b1)
// across the split line.
void connect_across(Partition& p, std::size_t a0, std::size_t a1, std::size_t b0, std::size_t b1,
                    bool vertical_line, double line) {
  double best = 0.0;
  CellDoor door{};
  auto eq = [](double u, double v) { return std::abs(u - v) < 1e-6; };
  for (std::size_t i = a0; i < a1; ++i) {
    for (std::size_t j = b0; j < b1; ++j) {
      const Rect& ra = p.cells[i];
      const Rect& rb = p.cells[j];
      double lo, hi;
      if (vertical_line) {
        if (!eq(ra.x1, line) || !eq(rb.x0, line)) continue;
        lo = std::max(ra.y0, rb.y0);
        hi = std::min(ra.y1, rb.y1);
      } else {
        if (!eq(ra.y1, line) || !eq(rb.y0, line)) continue;
        lo = std::max(ra.x0, rb.x0);
        hi = std::min(ra.x1, rb.x1);
      }
      if (hi - lo > best + 1e-9) {
        best = hi - lo;
        const double mid = (lo + hi) * 0.5;
        const double half = std::min(kDoorWidth, 0.6 * best) * 0.5;
        door = vertical_line ? CellDoor{i, j, {line, mid - half}, {line, mid + half}}
                             : CellDoor{i, j, {mid - half, line}, {mid + half, line}};
      }
    }
  }
  if (best < 0.5) throw PartitionFailure{};
  p.doors.push_back(door);
}

void split_rect(const Rect& r, int k, Rng& rng, double min_w, Partition& out) {
  if (k == 1) {
    out.cells.push_back(r);
    return;
  }
  const bool along_x = r.width() >= r.height();
  const double lo = along_x ? r.x0 : r.y0;
  const double len = along_x ? r.width() : r.height();
  if (len < 2.0 * min_w) throw PartitionFailure{};
  const int k1 = (k % 2 == 0 || rng.bernoulli(0.5)) ? k / 2 : k / 2 + 1;
  const int k2 = k - k1;
  const double frac = static_cast<double>(k1) / k + rng.uniform(-0.08, 0.08);
  double pos = snap(lo + frac * len, kGrid);
  pos = std::clamp(pos, lo + min_w, lo + len - min_w);
  pos = snap(pos, kGrid);
  Rect a = r, b = r;
  if (along_x) {
    a.x1 = pos;
    b.x0 = pos;
  } else {
    a.y1 = pos;
    b.y0 = pos;
  }
  // Each side must keep enough area for its share of rooms.
  if (a.area() < k1 * min_w * min_w * 1.3 || b.area() < k2 * min_w * min_w * 1.3) {
    throw PartitionFailure{};
  }
  const std::size_t a0 = out.cells.size();
  split_rect(a, k1, rng, min_w, out);
  const std::size_t b0 = out.cells.size();
  split_rect(b, k2, rng, min_w, out);
  connect_across(out, a0, b0, b0, out.cells.size(), along_x, pos);
}

RoomCategory pick_category(Rng& rng, bool ground, bool single_floor) {
  static constexpr std::array ground_pool = {RoomCategory::Bathroom, RoomCategory::Office,
                                             RoomCategory::Storage, RoomCategory::Living,
                                             RoomCategory::Kitchen};
  static constexpr std::array ground_w = {2.0, 2.0, 1.5, 0.5, 0.5};
  static constexpr std::array upper_pool = {RoomCategory::Bedroom, RoomCategory::Bathroom,
                                            RoomCategory::Office, RoomCategory::Storage,
                                            RoomCategory::Living};
  static constexpr std::array upper_w = {3.0, 1.5, 1.5, 1.0, 0.5};
  if (ground && !single_floor) return ground_pool[rng.weighted(ground_w)];
  if (ground) {
    // Single-floor houses need bedrooms on the ground floor.
    static constexpr std::array w = {2.0, 1.5, 1.0, 0.5, 0.5};
    return rng.weighted(w) == 0 ? RoomCategory::Bedroom : ground_pool[rng.weighted(ground_w)];
  }
  return upper_pool[rng.weighted(upper_w)];
}

template <typename E, std::size_t N>
E weighted_enum(Rng& rng, const std::vector<E>& allowed, const std::array<E, N>& all,
                const std::vector<double>& weights) {
  std::vector<double> w;
  w.reserve(allowed.size());
  for (E e : allowed) {
    const auto idx = static_cast<std::size_t>(std::ranges::find(all, e) - all.begin());
    w.push_back(weights[idx]);
  }
  return allowed[rng.weighted(w)];
}

void place_objects(const Room& room, int floor_index, double elevation, int count,
                   const GeneratorProfile& profile, Rng& rng, std::vector<SceneObject>& out) {
  std::vector<const ObjectClassInfo*> candidates;
  for (const auto& info : object_vocabulary()) {
    if (std::ranges::find(info.rooms, room.category) != info.rooms.end()) candidates.push_back(&info);
  }
  if (candidates.empty()) return;
  const Rect interior = room.rect.inset(0.1);
  std::vector<Rect> placed;
  std::vector<const ObjectClassInfo*> used;
  int serial = 0;
  for (int n = 0; n < count; ++n) {
    const ObjectClassInfo* cls = nullptr;
    if (!used.empty() && rng.bernoulli(0.3)) {
      cls = used[static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(used.size()) - 1))];
    } else {
      cls = candidates[static_cast<std::size_t>(
          rng.uniform_int(0, static_cast<std::int64_t>(candidates.size()) - 1))];
    }
    double w = snap(rng.uniform(cls->width[0], cls->width[1]), 0.01);
    double d = snap(rng.uniform(cls->depth[0], cls->depth[1]), 0.01);
    const double h = snap(rng.uniform(cls->height[0], cls->height[1]), 0.01);
    if (rng.bernoulli(0.5)) std::swap(w, d);
    if (w > interior.width() || d > interior.height()) continue;
    std::optional<Rect> spot;
    for (int attempt = 0; attempt < 40 && !spot; ++attempt) {
      const double x = snap(rng.uniform(interior.x0, interior.x1 - w), 0.01);
      const double y = snap(rng.uniform(interior.y0, interior.y1 - d), 0.01);
      Rect fp{quantize(x), quantize(y), quantize(x + w), quantize(y + d)};
      if (!interior.contains(fp)) continue;
      const bool clash = std::ranges::any_of(placed, [&](const Rect& o) {
        return intersection(fp, o.inset(-0.05)).area() > 0.0;
      });
      if (!clash) spot = fp;
    }
    if (!spot) continue;
    placed.push_back(*spot);
    if (std::ranges::find(used, cls) == used.end()) used.push_back(cls);

    SceneObject obj;
    obj.object_id = fmt::format("{}-o{:02}", room.room_id, serial++);
    obj.class_name = std::string(cls->name);
    obj.room_id = room.room_id;
    obj.aabb = Box3{{spot->x0, spot->y0, quantize(elevation)},
                    {spot->x1, spot->y1, quantize(elevation + h)}};
    obj.color = weighted_enum(rng, cls->colors, kAllColors, profile.color_weights);
    obj.material = weighted_enum(rng, cls->materials, kAllMaterials, profile.material_weights);
    obj.shape = weighted_enum(rng, cls->shapes, kAllShapes, profile.shape_weights);
    obj.state = cls->states[static_cast<std::size_t>(
        rng.uniform_int(0, static_cast<std::int64_t>(cls->states.size()) - 1))];
    obj.floor_index = floor_index;
    out.push_back(std::move(obj));
  }
}

Scene try_generate(std::uint64_t seed, const GeneratorProfile& profile, Rng& rng) {
  Scene scene;
  scene.seed = seed;
  scene.scene_id = fmt::format("scene-{:016x}", seed);

  const int n_floors = static_cast<int>(rng.uniform_int(profile.floor_count.min, profile.floor_count.max));
  double width = 0.0, depth = 0.0;
  bool sized = false;
  for (int i = 0; i < 64 && !sized; ++i) {
    width = snap(rng.uniform(profile.footprint_width.min, profile.footprint_width.max), 0.1);
    depth = snap(rng.uniform(profile.footprint_depth.min, profile.footprint_depth.max), 0.1);
    sized = n_floors * width * depth >= profile.min_total_area;
  }
  if (!sized) throw PartitionFailure{};

  const int lo = std::max(profile.total_rooms.min, n_floors * profile.rooms_per_floor.min);
  const int hi = std::min(profile.total_rooms.max, n_floors * profile.rooms_per_floor.max);
  if (lo > hi) throw PartitionFailure{};
  const int total = static_cast<int>(rng.uniform_int(lo, hi));
  std::vector<int> per_floor(static_cast<std::size_t>(n_floors), profile.rooms_per_floor.min);
  for (int extra = total - n_floors * profile.rooms_per_floor.min; extra > 0; --extra) {
    std::vector<std::size_t> open;
    for (std::size_t f = 0; f < per_floor.size(); ++f) {
      if (per_floor[f] < profile.rooms_per_floor.max) open.push_back(f);
    }
    per_floor[open[static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(open.size()) - 1))]]++;
  }

  const double strip = std::max(3.0, profile.min_room_width);
  const double stair_depth = 4.0;
  const Rect footprint{0.0, 0.0, width, depth};
  const bool single = n_floors == 1;

  for (int f = 0; f < n_floors; ++f) {
    Partition part;
    part.cells.push_back({0.0, 0.0, strip, stair_depth});
    part.cells.push_back({0.0, stair_depth, strip, depth});
    part.doors.push_back({0, 1, {strip * 0.5 - kDoorWidth * 0.5, stair_depth},
                          {strip * 0.5 + kDoorWidth * 0.5, stair_depth}});
    split_rect({strip, 0.0, width, depth}, per_floor[static_cast<std::size_t>(f)] - 2, rng,
               profile.min_room_width, part);
    connect_across(part, 0, 2, 2, part.cells.size(), true, strip);

    Floor floor;
    floor.index = f;
    floor.footprint = footprint;
    floor.elevation_z = quantize(f * kFloorHeight);

    // Largest remainder cells get the anchor categories.
    std::vector<std::size_t> by_area;
    for (std::size_t i = 2; i < part.cells.size(); ++i) by_area.push_back(i);
    std::ranges::stable_sort(by_area, [&](std::size_t a, std::size_t b) {
      return part.cells[a].area() > part.cells[b].area();
    });
    std::vector<RoomCategory> cats(part.cells.size(), RoomCategory::Hallway);
    cats[0] = single ? RoomCategory::Hallway : RoomCategory::Stairwell;
    for (std::size_t rank = 0; rank < by_area.size(); ++rank) {
      RoomCategory c;
      if (f == 0 && rank == 0) c = RoomCategory::Living;
      else if (f == 0 && rank == 1) c = RoomCategory::Kitchen;
      else if (f != 0 && rank == 0) c = RoomCategory::Bedroom;
      else if (rank == 2 || (f != 0 && rank == 1)) c = RoomCategory::Bathroom;
      else c = pick_category(rng, f == 0, single);
      cats[by_area[rank]] = c;
    }

    for (std::size_t i = 0; i < part.cells.size(); ++i) {
      Room room;
      room.room_id = fmt::format("f{}-r{:02}", f, i);
      room.category = cats[i];
      const Rect& c = part.cells[i];
      room.rect = Rect{quantize(c.x0 + kWallHalfThickness), quantize(c.y0 + kWallHalfThickness),
                       quantize(c.x1 - kWallHalfThickness), quantize(c.y1 - kWallHalfThickness)};
      floor.rooms.push_back(std::move(room));
    }
    for (const auto& d : part.doors) {
      const Vec2 p0{quantize(d.p0.x), quantize(d.p0.y)};
      const Vec2 p1{quantize(d.p1.x), quantize(d.p1.y)};
      floor.rooms[d.a].door_edges.push_back({p0, p1, floor.rooms[d.b].room_id});
      floor.rooms[d.b].door_edges.push_back({p0, p1, floor.rooms[d.a].room_id});
    }
    if (f == 0) {
      const double mid = snap((stair_depth + depth) * 0.5, kGrid);
      floor.rooms[1].door_edges.push_back(
          {{0.0, quantize(mid - kDoorWidth * 0.5)}, {0.0, quantize(mid + kDoorWidth * 0.5)}, ""});
    }

    for (const auto& room : floor.rooms) {
      if (room.category == RoomCategory::Stairwell) continue;
      int count = static_cast<int>(rng.uniform_int(profile.objects_per_room.min, profile.objects_per_room.max));
      if (room.category == RoomCategory::Hallway) count = std::min(count, 3);
      place_objects(room, f, floor.elevation_z, count, profile, rng, scene.objects);
    }
    scene.floors.push_back(std::move(floor));
  }
  std::ranges::sort(scene.objects, {}, &SceneObject::object_id);
  scene.total_area = quantize(n_floors * width * depth);
  return scene;
}

}  // namespace

Scene generate_scene(std::uint64_t seed, const GeneratorProfile& profile) {
  profile.validate();
  for (int attempt = 0; attempt < profile.max_retries; ++attempt) {
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(attempt)));
    try {
      return try_generate(seed, profile, rng);
    } catch (const PartitionFailure&) {
    }
  }
  throw Error(ErrorCode::GenerationFailed,
              fmt::format("no valid room partition for seed {} after {} attempts", seed,
                          profile.max_retries));
}

bool ObjectFilter::matches(const Scene& scene, const SceneObject& obj) const {
  if (class_name && obj.class_name != *class_name) return false;
  if (floor && obj.floor_index != *floor) return false;
  if (room_id && obj.room_id != *room_id) return false;
  if (color && obj.color != *color) return false;
  if (material && obj.material != *material) return false;
  if (shape && obj.shape != *shape) return false;
  if (state && obj.state != *state) return false;
  if (room_category) {
    const Room* room = scene.find_room(obj.room_id);
    if (!room || room->category != *room_category) return false;
  }
  return true;
}

std::vector<const SceneObject*> query_objects(const Scene& scene, const ObjectFilter& filter) {
  std::vector<const SceneObject*> out;
  for (const auto& obj : scene.objects) {
    if (filter.matches(scene, obj)) out.push_back(&obj);
  }
  return out;
}

BevMapping::BevMapping(const Rect& footprint, double width_px, double height_px)
    : footprint_(footprint),
      sx_(footprint.width() / width_px),
      sy_(footprint.height() / height_px) {}

Vec2 BevMapping::to_pixel(Vec2 world) const {
  return {(world.x - footprint_.x0) / sx_, (world.y - footprint_.y0) / sy_};
}

Vec2 BevMapping::to_world(Vec2 pixel) const {
  return {footprint_.x0 + pixel.x * sx_, footprint_.y0 + pixel.y * sy_};
}

BBox2D BevMapping::to_pixel(const Rect& world) const {
  const Vec2 a = to_pixel(Vec2{world.x0, world.y0});
  const Vec2 b = to_pixel(Vec2{world.x1, world.y1});
  return {a.x, a.y, b.x, b.y};
}

Rect BevMapping::to_world(const BBox2D& pixel) const {
  const Vec2 a = to_world(Vec2{pixel.x_min, pixel.y_min});
  const Vec2 b = to_world(Vec2{pixel.x_max, pixel.y_max});
  return {a.x, a.y, b.x, b.y};
}

BevMapping bev_mapping(const Scene& scene, int floor, int resolution) {
  if (floor < 0 || floor >= scene.floor_count()) {
    throw Error(ErrorCode::InvalidArgument, fmt::format("floor {} out of range", floor));
  }
  return BevMapping(scene.floors[static_cast<std::size_t>(floor)].footprint, resolution, resolution);
}

Vec2 world_to_bev(const Scene& scene, int floor, Vec2 p_world, int resolution) {
  const BevMapping m = bev_mapping(scene, floor, resolution);
  const Rect& fp = scene.floors[static_cast<std::size_t>(floor)].footprint;
  if (!fp.contains(p_world)) {
    throw Error(ErrorCode::InvalidArgument,
                fmt::format("point ({}, {}) outside floor {} footprint", p_world.x, p_world.y, floor));
  }
  return m.to_pixel(p_world);
}

Vec2 bev_to_world(const Scene& scene, int floor, Vec2 pixel, int resolution) {
  return bev_mapping(scene, floor, resolution).to_world(pixel);
}

Box3 building_envelope(const Scene& scene) {
  if (scene.floors.empty()) return {};
  const Rect& fp = scene.floors.front().footprint;
  const double top = scene.floors.back().elevation_z + kFloorHeight;
  return {{fp.x0, fp.y0, scene.floors.front().elevation_z}, {fp.x1, fp.y1, top}};
}

bool all_rooms_reachable(const Scene& scene) {
  std::map<std::string, std::vector<std::string>> adj;
  for (std::size_t f = 0; f < scene.floors.size(); ++f) {
    for (const auto& room : scene.floors[f].rooms) {
      auto& edges = adj[room.room_id];
      for (const auto& d : room.door_edges) {
        if (!d.other_room.empty()) edges.push_back(d.other_room);
      }
      if (room.category == RoomCategory::Stairwell && f + 1 < scene.floors.size()) {
        for (const auto& up : scene.floors[f + 1].rooms) {
          if (up.category == RoomCategory::Stairwell && up.rect == room.rect) {
            edges.push_back(up.room_id);
            adj[up.room_id].push_back(room.room_id);
          }
        }
      }
    }
  }
  if (scene.floors.empty() || scene.floors[0].rooms.empty()) return false;
  std::map<std::string, bool> seen;
  std::deque<std::string> queue{scene.floors[0].rooms[0].room_id};
  seen[queue.front()] = true;
  while (!queue.empty()) {
    const std::string cur = queue.front();
    queue.pop_front();
    for (const auto& next : adj[cur]) {
      if (!seen[next]) {
        seen[next] = true;
        queue.push_back(next);
      }
    }
  }
  return static_cast<int>(std::ranges::count_if(seen, [](const auto& kv) { return kv.second; })) ==
         scene.room_count();
}

}  // namespace arena
