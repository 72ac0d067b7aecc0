#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "spatial_arena/geometry.hpp"

namespace arena {

inline constexpr double kFloorHeight = 2.8;
inline constexpr double kWallHalfThickness = 0.025;
inline constexpr int kDefaultBevResolution = 512;

enum class RoomCategory { Bedroom, Kitchen, Bathroom, Living, Hallway, Stairwell, Office, Storage };
enum class Color { Red, Orange, Yellow, Green, Blue, Purple, Pink, Brown, Black, White, Gray, Beige };
enum class Material { Wood, Metal, Fabric, Glass, Plastic, Ceramic, Leather, Stone };
enum class Shape { Rectangular, Round, LShaped, Cylindrical, Irregular };
enum class ObjectState { Open, Closed, On, Off, Folded, Unfolded, None };

inline constexpr std::array kAllRoomCategories = {
    RoomCategory::Bedroom, RoomCategory::Kitchen,   RoomCategory::Bathroom, RoomCategory::Living,
    RoomCategory::Hallway, RoomCategory::Stairwell, RoomCategory::Office,   RoomCategory::Storage};
inline constexpr std::array kAllColors = {Color::Red,   Color::Orange, Color::Yellow, Color::Green,
                                          Color::Blue,  Color::Purple, Color::Pink,   Color::Brown,
                                          Color::Black, Color::White,  Color::Gray,   Color::Beige};
inline constexpr std::array kAllMaterials = {Material::Wood,    Material::Metal,   Material::Fabric,
                                             Material::Glass,   Material::Plastic, Material::Ceramic,
                                             Material::Leather, Material::Stone};
inline constexpr std::array kAllShapes = {Shape::Rectangular, Shape::Round, Shape::LShaped,
                                          Shape::Cylindrical, Shape::Irregular};
inline constexpr std::array kAllStates = {ObjectState::Open,   ObjectState::Closed, ObjectState::On,
                                          ObjectState::Off,    ObjectState::Folded,
                                          ObjectState::Unfolded, ObjectState::None};

std::string_view to_string(RoomCategory c);
std::string_view to_string(Color c);
std::string_view to_string(Material m);
std::string_view to_string(Shape s);
std::string_view to_string(ObjectState s);
/// Human-readable room name used in question and answer text ("living room").
std::string_view display_name(RoomCategory c);

// Parsers throw Error{InvalidArgument} on unknown names.
RoomCategory parse_room_category(std::string_view s);
Color parse_color(std::string_view s);
Material parse_material(std::string_view s);
Shape parse_shape(std::string_view s);
ObjectState parse_state(std::string_view s);

/// Static description of one object class in the fixed vocabulary.
struct ObjectClassInfo {
  std::string_view name;
  std::vector<RoomCategory> rooms;
  std::array<double, 2> width;  // meters, min/max
  std::array<double, 2> depth;
  std::array<double, 2> height;
  std::vector<Color> colors;
  std::vector<Material> materials;
  std::vector<Shape> shapes;
  std::vector<ObjectState> states;  // {None} for stateless classes
};

const std::vector<ObjectClassInfo>& object_vocabulary();
const ObjectClassInfo* find_object_class(std::string_view name);

/// A doorway on a room wall. `other_room` is empty for an exterior door.
struct DoorEdge {
  Vec2 a;
  Vec2 b;
  std::string other_room;
  friend bool operator==(const DoorEdge&, const DoorEdge&) = default;
};

struct Room {
  std::string room_id;
  RoomCategory category = RoomCategory::Hallway;
  Rect rect;
  std::vector<DoorEdge> door_edges;
  friend bool operator==(const Room&, const Room&) = default;
};

struct SceneObject {
  std::string object_id;
  std::string class_name;
  std::string room_id;
  Box3 aabb;
  Color color = Color::White;
  Material material = Material::Wood;
  Shape shape = Shape::Rectangular;
  ObjectState state = ObjectState::None;
  int floor_index = 0;
  friend bool operator==(const SceneObject&, const SceneObject&) = default;
};

struct Floor {
  int index = 0;
  Rect footprint;
  double elevation_z = 0.0;
  std::vector<Room> rooms;
  friend bool operator==(const Floor&, const Floor&) = default;
};

struct Scene {
  std::string scene_id;
  std::uint64_t seed = 0;
  std::vector<Floor> floors;
  std::vector<SceneObject> objects;  // sorted by object_id
  double total_area = 0.0;

  int floor_count() const { return static_cast<int>(floors.size()); }
  int room_count() const;
  const Room* find_room(std::string_view room_id) const;
  const SceneObject* find_object(std::string_view object_id) const;
  friend bool operator==(const Scene&, const Scene&) = default;
};

struct IntRange {
  int min = 0;
  int max = 0;
  bool valid() const { return min <= max; }
};

struct RealRange {
  double min = 0.0;
  double max = 0.0;
  bool valid() const { return min <= max; }
};

struct GeneratorProfile {
  IntRange floor_count{1, 3};
  IntRange total_rooms{10, 20};
  IntRange rooms_per_floor{3, 16};
  IntRange objects_per_room{2, 6};
  RealRange footprint_width{12.0, 24.0};
  RealRange footprint_depth{10.0, 18.0};
  /// Footprints are resampled until floors * footprint area reaches this.
  double min_total_area = 320.0;
  double min_room_width = 2.5;
  /// Sampling weights per enum value, indexed like kAllColors / kAllMaterials / kAllShapes.
  std::vector<double> color_weights = std::vector<double>(kAllColors.size(), 1.0);
  std::vector<double> material_weights = std::vector<double>(kAllMaterials.size(), 1.0);
  std::vector<double> shape_weights = std::vector<double>(kAllShapes.size(), 1.0);
  int max_retries = 64;

  /// Throws Error{InvalidArgument} describing the first violated constraint.
  void validate() const;
};

/// Deterministic in (seed, profile). Throws Error{GenerationFailed} if no valid
/// partition is found within the profile's retry budget.
Scene generate_scene(std::uint64_t seed, const GeneratorProfile& profile = {});

struct ObjectFilter {
  std::optional<std::string> class_name;
  std::optional<int> floor;
  std::optional<std::string> room_id;
  std::optional<RoomCategory> room_category;
  std::optional<Color> color;
  std::optional<Material> material;
  std::optional<Shape> shape;
  std::optional<ObjectState> state;

  bool matches(const Scene& scene, const SceneObject& obj) const;
};

/// Objects satisfying every populated field of `filter`, in object_id order.
std::vector<const SceneObject*> query_objects(const Scene& scene, const ObjectFilter& filter);

/// Affine map between a floor footprint and a BEV pixel grid of the given size.
class BevMapping {
 public:
  BevMapping(const Rect& footprint, double width_px, double height_px);

  Vec2 to_pixel(Vec2 world) const;
  Vec2 to_world(Vec2 pixel) const;
  BBox2D to_pixel(const Rect& world) const;
  Rect to_world(const BBox2D& pixel) const;
  /// World extent of a single pixel along x and y.
  Vec2 pixel_size() const { return {sx_, sy_}; }

 private:
  Rect footprint_;
  double sx_;
  double sy_;
};

BevMapping bev_mapping(const Scene& scene, int floor, int resolution = kDefaultBevResolution);

/// Throws Error{InvalidArgument} for a bad floor or a point outside the footprint.
Vec2 world_to_bev(const Scene& scene, int floor, Vec2 p_world,
                  int resolution = kDefaultBevResolution);
Vec2 bev_to_world(const Scene& scene, int floor, Vec2 pixel,
                  int resolution = kDefaultBevResolution);

/// Building envelope: footprint of floor 0 extruded over all floors.
Box3 building_envelope(const Scene& scene);

/// Room adjacency through doors and stairwells; every room must be reachable.
bool all_rooms_reachable(const Scene& scene);

}  // namespace arena
