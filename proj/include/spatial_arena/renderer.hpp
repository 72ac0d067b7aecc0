#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "spatial_arena/geometry.hpp"
#include "spatial_arena/image.hpp"
#include "spatial_arena/scene.hpp"

namespace arena {

inline constexpr int kDefaultViewResolution = 256;
inline constexpr int kDefaultZoomResolution = 512;
inline constexpr double kDefaultFov = 90.0;

Rgb palette_rgb(Color c);
/// Inverse of palette_rgb for unshaded pixels.
std::optional<Color> palette_lookup(Rgb rgb);

namespace style {
inline constexpr Rgb kWall{45, 45, 45};
inline constexpr Rgb kRoomFloor{222, 214, 196};
inline constexpr Rgb kOutline{95, 95, 95};
inline constexpr Rgb kViewWall{200, 200, 200};
inline constexpr Rgb kViewFloor{160, 130, 100};
inline constexpr Rgb kViewCeiling{235, 235, 235};
inline constexpr Rgb kBackground{0, 0, 0};
/// Brightness applied to x-, y-, and z-facing surfaces in first-person views.
inline constexpr double kFaceBrightness[3] = {0.8, 0.6, 1.0};
}  // namespace style

Rgb shade(Rgb base, int axis);

struct CameraPose {
  Vec3 position;
  double yaw = 0.0;    // degrees, 0 looks along +x, 90 along +y
  double pitch = 0.0;  // degrees, positive looks up
  double roll = 0.0;
  double fov = kDefaultFov;  // horizontal, degrees

  /// Throws Error{InvalidArgument} when an angle is out of range.
  void validate() const;
  friend bool operator==(const CameraPose&, const CameraPose&) = default;
};

/// Maps any angle to [-180, 180).
double wrap_yaw(double degrees);
Vec3 view_direction(double yaw, double pitch);
/// Geodesic angle in degrees between the view directions of two poses (roll ignored).
double view_angle_between(double yaw_a, double pitch_a, double yaw_b, double pitch_b);

/// Object indices (into Scene::objects) per pixel, -1 where no object was drawn.
struct IdBuffer {
  int width = 0;
  int height = 0;
  std::vector<std::int32_t> ids;

  std::int32_t at(int x, int y) const {
    return ids[static_cast<std::size_t>(y) * static_cast<std::size_t>(width) + static_cast<std::size_t>(x)];
  }
  /// Pixel count per object index.
  std::vector<int> histogram(std::size_t object_count) const;
};

struct Raster {
  Image image;
  IdBuffer ids;
};

/// Top-down raster of an arbitrary world rectangle on one floor.
Raster rasterize_floor_region(const Scene& scene, int floor, const Rect& region, int width, int height);

Image render_bev(const Scene& scene, int floor, int resolution = kDefaultBevResolution);
Raster render_bev_raster(const Scene& scene, int floor, int resolution = kDefaultBevResolution);

/// Re-rasterizes the world region under `bbox` (BEV pixel coordinates at
/// `bev_resolution`). Throws Error{InvalidRegion} when the clamped box has
/// less than 4 px² of area.
Image render_zoom(const Scene& scene, int floor, const BBox2D& bbox,
                  int out_resolution = kDefaultZoomResolution,
                  int bev_resolution = kDefaultBevResolution);
Raster render_zoom_raster(const Scene& scene, int floor, const BBox2D& bbox,
                          int out_resolution = kDefaultZoomResolution,
                          int bev_resolution = kDefaultBevResolution);

enum class SurfaceKind { None, Object, Wall, FloorPlane, Ceiling };

struct RayHit {
  double t = 0.0;
  SurfaceKind kind = SurfaceKind::None;
  int axis = 2;
  std::int32_t object = -1;
  std::int32_t box = -1;  // index into FloorGeometry::boxes()
};

/// Static collision geometry of one floor: wall slabs and object boxes,
/// binned into a uniform 2D grid for ray traversal. Floor and ceiling are
/// handled analytically as planes clipped to the footprint.
class FloorGeometry {
 public:
  FloorGeometry(const Scene& scene, int floor);

  int floor() const { return floor_; }
  const std::vector<Box3>& boxes() const { return boxes_; }
  /// Object index for each box, -1 for walls.
  const std::vector<std::int32_t>& box_objects() const { return box_objects_; }
  const Rect& footprint() const { return footprint_; }
  double floor_z() const { return z0_; }
  double ceiling_z() const { return z1_; }

  RayHit cast(const Ray& ray) const;

  struct Candidate {
    double distance;  // Euclidean distance from the ray origin to the box
    std::uint32_t box;
  };
  /// Same result as cast() when `candidates` holds every box the ray can hit,
  /// sorted by distance.
  RayHit cast_candidates(const Ray& ray, std::span<const Candidate> candidates) const;

 private:
  void hit_planes(const Ray& ray, RayHit& best) const;
  void consider_box(const Ray& ray, const Vec3& inv, std::uint32_t i, RayHit& best) const;
  void test_cell(const Ray& ray, const Vec3& inv, int cx, int cy, RayHit& best) const;

  int floor_;
  Rect footprint_;
  double z0_;
  double z1_;
  std::vector<Box3> boxes_;
  std::vector<std::int32_t> box_objects_;
  Rect grid_bounds_;
  double cell_ = 1.0;
  int nx_ = 0;
  int ny_ = 0;
  std::vector<std::uint32_t> cell_start_;  // nx*ny+1 offsets into cell_boxes_
  std::vector<std::uint32_t> cell_boxes_;
};

/// Floor a camera at this height stands on.
int floor_of_position(const Scene& scene, const Vec3& p);

/// Throws Error{PoseOutOfBounds} outside the building envelope and
/// Error{InvalidArgument} for invalid angles.
void check_pose(const Scene& scene, const CameraPose& pose);

struct CameraRig {
  CameraRig(const CameraPose& pose, int width, int height);

  Ray pixel_ray(int x, int y) const;
  /// Pixel coordinates of a world point, or nullopt when it is behind the camera.
  std::optional<Vec2> project(Vec3 p) const;

  Vec3 origin;
  Vec3 forward;
  Vec3 right;
  Vec3 up;
  double tan_half_h;
  double tan_half_v;
  int width;
  int height;
};

Image render_view(const Scene& scene, const CameraPose& pose, int resolution = kDefaultViewResolution);
Raster render_view_raster(const Scene& scene, const CameraPose& pose,
                          int resolution = kDefaultViewResolution);
Raster render_view_raster(const FloorGeometry& geom, const Scene& scene, const CameraPose& pose,
                          int resolution);

/// Pixels at which `object_index` is the nearest surface, casting only the
/// rays inside the object's projected bounds.
int count_visible_pixels(const FloorGeometry& geom, const Scene& scene, const CameraPose& pose,
                         int resolution, std::int32_t object_index);

}  // namespace arena
