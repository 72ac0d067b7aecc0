#include "spatial_arena/renderer.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/format.h>
#include <limits>

#include "spatial_arena/error.hpp"

namespace arena {

namespace {

constexpr Rgb kPalette[] = {
    {220, 40, 40},    // red
    {245, 140, 30},   // orange
    {240, 220, 50},   // yellow
    {50, 160, 60},    // green
    {40, 80, 210},    // blue
    {130, 60, 170},   // purple
    {240, 150, 190},  // pink
    {130, 85, 45},    // brown
    {20, 20, 20},     // black
    {250, 250, 250},  // white
    {128, 128, 128},  // gray
    {225, 205, 165},  // beige
};

constexpr double kInf = std::numeric_limits<double>::infinity();

// Pixel index range [first, last) whose centers fall inside [lo, hi) of a
// region starting at `origin` with pixel size `step`.
std::pair<int, int> pixel_span(double lo, double hi, double origin, double step, int n) {
  const int first = static_cast<int>(std::ceil((lo - origin) / step - 0.5));
  const int last = static_cast<int>(std::ceil((hi - origin) / step - 0.5));
  return {std::clamp(first, 0, n), std::clamp(last, 0, n)};
}

}  // namespace

Rgb palette_rgb(Color c) { return kPalette[static_cast<int>(c)]; }

std::optional<Color> palette_lookup(Rgb rgb) {
  for (Color c : kAllColors) {
    if (palette_rgb(c) == rgb) return c;
  }
  return std::nullopt;
}

Rgb shade(Rgb base, int axis) {
  const double k = style::kFaceBrightness[axis];
  auto s = [k](std::uint8_t v) { return static_cast<std::uint8_t>(std::lround(v * k)); };
  return {s(base.r), s(base.g), s(base.b)};
}

void CameraPose::validate() const {
  auto bad = [](std::string msg) { throw Error(ErrorCode::InvalidArgument, std::move(msg)); };
  if (!std::isfinite(position.x) || !std::isfinite(position.y) || !std::isfinite(position.z)) {
    bad("camera position must be finite");
  }
  if (!(yaw >= -180.0 && yaw < 180.0)) bad(fmt::format("yaw {} outside [-180, 180)", yaw));
  if (!(pitch >= -89.0 && pitch <= 89.0)) bad(fmt::format("pitch {} outside [-89, 89]", pitch));
  if (roll != 0.0) bad("roll must be 0");
  if (!(fov > 30.0 && fov < 120.0)) bad(fmt::format("fov {} outside (30, 120)", fov));
}

double wrap_yaw(double degrees) {
  double y = std::fmod(degrees + 180.0, 360.0);
  if (y < 0.0) y += 360.0;
  y -= 180.0;
  return y >= 180.0 ? y - 360.0 : y;
}

Vec3 view_direction(double yaw, double pitch) {
  const double y = deg2rad(yaw);
  const double p = deg2rad(pitch);
  return {std::cos(p) * std::cos(y), std::cos(p) * std::sin(y), std::sin(p)};
}

double view_angle_between(double yaw_a, double pitch_a, double yaw_b, double pitch_b) {
  const Vec3 a = view_direction(yaw_a, pitch_a);
  const Vec3 b = view_direction(yaw_b, pitch_b);
  // atan2 form stays accurate for nearly parallel directions.
  return rad2deg(std::atan2(norm(cross(a, b)), dot(a, b)));
}

std::vector<int> IdBuffer::histogram(std::size_t object_count) const {
  std::vector<int> h(object_count, 0);
  for (std::int32_t id : ids) {
    if (id >= 0) ++h[static_cast<std::size_t>(id)];
  }
  return h;
}

Raster rasterize_floor_region(const Scene& scene, int floor, const Rect& region, int width, int height) {
  if (floor < 0 || floor >= scene.floor_count()) {
    throw Error(ErrorCode::InvalidArgument, fmt::format("floor {} out of range", floor));
  }
  const Floor& fl = scene.floors[static_cast<std::size_t>(floor)];
  Raster out{Image(width, height, style::kWall),
             IdBuffer{width, height, std::vector<std::int32_t>(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), -1)}};
  const double sx = region.width() / width;
  const double sy = region.height() / height;

  auto fill = [&](const Rect& r, Rgb c) {
    const auto [x0, x1] = pixel_span(r.x0, r.x1, region.x0, sx, width);
    const auto [y0, y1] = pixel_span(r.y0, r.y1, region.y0, sy, height);
    for (int y = y0; y < y1; ++y) {
      for (int x = x0; x < x1; ++x) out.image.set(x, y, c);
    }
  };

  for (const auto& room : fl.rooms) fill(room.rect, style::kRoomFloor);
  for (const auto& room : fl.rooms) {
    for (const auto& d : room.door_edges) {
      const double t = kWallHalfThickness + 1e-6;
      fill(Rect{std::min(d.a.x, d.b.x) - t, std::min(d.a.y, d.b.y) - t, std::max(d.a.x, d.b.x) + t,
                std::max(d.a.y, d.b.y) + t},
           style::kRoomFloor);
    }
  }
  for (const auto& room : fl.rooms) {
    const auto [x0, x1] = pixel_span(room.rect.x0, room.rect.x1, region.x0, sx, width);
    const auto [y0, y1] = pixel_span(room.rect.y0, room.rect.y1, region.y0, sy, height);
    if (x0 >= x1 || y0 >= y1) continue;
    // Only edges that actually lie inside the region are outlined.
    const bool left = room.rect.x0 >= region.x0, right = room.rect.x1 <= region.x1;
    const bool top = room.rect.y0 >= region.y0, bottom = room.rect.y1 <= region.y1;
    for (int x = x0; x < x1; ++x) {
      if (top) out.image.set(x, y0, style::kOutline);
      if (bottom) out.image.set(x, y1 - 1, style::kOutline);
    }
    for (int y = y0; y < y1; ++y) {
      if (left) out.image.set(x0, y, style::kOutline);
      if (right) out.image.set(x1 - 1, y, style::kOutline);
    }
  }

  // Front-to-back: the tallest object claims a pixel first, ties by object_id.
  std::vector<std::int32_t> order;
  for (std::size_t i = 0; i < scene.objects.size(); ++i) {
    if (scene.objects[i].floor_index == floor) order.push_back(static_cast<std::int32_t>(i));
  }
  std::ranges::stable_sort(order, [&](std::int32_t a, std::int32_t b) {
    const auto& oa = scene.objects[static_cast<std::size_t>(a)];
    const auto& ob = scene.objects[static_cast<std::size_t>(b)];
    if (oa.aabb.max.z != ob.aabb.max.z) return oa.aabb.max.z > ob.aabb.max.z;
    return oa.object_id < ob.object_id;
  });
  for (std::int32_t idx : order) {
    const auto& obj = scene.objects[static_cast<std::size_t>(idx)];
    const Rect fp = obj.aabb.footprint();
    const auto [x0, x1] = pixel_span(fp.x0, fp.x1, region.x0, sx, width);
    const auto [y0, y1] = pixel_span(fp.y0, fp.y1, region.y0, sy, height);
    const Rgb c = palette_rgb(obj.color);
    for (int y = y0; y < y1; ++y) {
      for (int x = x0; x < x1; ++x) {
        auto& id = out.ids.ids[static_cast<std::size_t>(y) * static_cast<std::size_t>(width) + static_cast<std::size_t>(x)];
        if (id >= 0) continue;
        id = idx;
        out.image.set(x, y, c);
      }
    }
  }
  return out;
}

Raster render_bev_raster(const Scene& scene, int floor, int resolution) {
  const BevMapping m = bev_mapping(scene, floor, resolution);
  const Rect region = m.to_world(BBox2D{0.0, 0.0, static_cast<double>(resolution), static_cast<double>(resolution)});
  return rasterize_floor_region(scene, floor, region, resolution, resolution);
}

Image render_bev(const Scene& scene, int floor, int resolution) {
  return render_bev_raster(scene, floor, resolution).image;
}

Raster render_zoom_raster(const Scene& scene, int floor, const BBox2D& bbox, int out_resolution,
                          int bev_resolution) {
  const BevMapping m = bev_mapping(scene, floor, bev_resolution);
  const BBox2D c = clamp_bbox(bbox, bev_resolution, bev_resolution).box;
  if (!c.valid() || c.area() < 4.0) {
    throw Error(ErrorCode::InvalidRegion,
                fmt::format("zoom region [{}, {}, {}, {}] has no usable area after clamping",
                            bbox.x_min, bbox.y_min, bbox.x_max, bbox.y_max));
  }
  return rasterize_floor_region(scene, floor, m.to_world(c), out_resolution, out_resolution);
}

Image render_zoom(const Scene& scene, int floor, const BBox2D& bbox, int out_resolution, int bev_resolution) {
  return render_zoom_raster(scene, floor, bbox, out_resolution, bev_resolution).image;
}

namespace {

// Wall slabs for one side of a room, minus door openings. `fixed_lo/hi` is the
// slab extent across the wall; [a, b] the extent along it.
void add_side(std::vector<Box3>& boxes, bool along_y, double fixed_lo, double fixed_hi, double a,
              double b, std::vector<std::pair<double, double>> openings, double z0, double z1) {
  std::ranges::sort(openings);
  double cur = a;
  auto emit = [&](double s, double e) {
    if (e - s <= 1e-9) return;
    boxes.push_back(along_y ? Box3{{fixed_lo, s, z0}, {fixed_hi, e, z1}}
                            : Box3{{s, fixed_lo, z0}, {e, fixed_hi, z1}});
  };
  for (const auto& [s, e] : openings) {
    emit(cur, std::max(cur, s));
    cur = std::max(cur, e);
  }
  emit(cur, b);
}

}  // namespace

FloorGeometry::FloorGeometry(const Scene& scene, int floor) : floor_(floor) {
  if (floor < 0 || floor >= scene.floor_count()) {
    throw Error(ErrorCode::InvalidArgument, fmt::format("floor {} out of range", floor));
  }
  const Floor& fl = scene.floors[static_cast<std::size_t>(floor)];
  footprint_ = fl.footprint;
  z0_ = fl.elevation_z;
  z1_ = fl.elevation_z + kFloorHeight;
  constexpr double t = kWallHalfThickness;
  auto on_line = [](double u, double v) { return std::abs(u - v) < 1e-6; };

  for (const auto& room : fl.rooms) {
    const Rect& r = room.rect;
    std::vector<std::pair<double, double>> left, right, bottom, top;
    for (const auto& d : room.door_edges) {
      const double ylo = std::min(d.a.y, d.b.y), yhi = std::max(d.a.y, d.b.y);
      const double xlo = std::min(d.a.x, d.b.x), xhi = std::max(d.a.x, d.b.x);
      if (on_line(d.a.x, d.b.x)) {
        if (on_line(d.a.x, r.x0 - t)) left.emplace_back(ylo, yhi);
        if (on_line(d.a.x, r.x1 + t)) right.emplace_back(ylo, yhi);
      } else {
        if (on_line(d.a.y, r.y0 - t)) bottom.emplace_back(xlo, xhi);
        if (on_line(d.a.y, r.y1 + t)) top.emplace_back(xlo, xhi);
      }
    }
    add_side(boxes_, true, r.x0 - t, r.x0, r.y0 - t, r.y1 + t, left, z0_, z1_);
    add_side(boxes_, true, r.x1, r.x1 + t, r.y0 - t, r.y1 + t, right, z0_, z1_);
    add_side(boxes_, false, r.y0 - t, r.y0, r.x0 - t, r.x1 + t, bottom, z0_, z1_);
    add_side(boxes_, false, r.y1, r.y1 + t, r.x0 - t, r.x1 + t, top, z0_, z1_);
  }
  box_objects_.assign(boxes_.size(), -1);
  for (std::size_t i = 0; i < scene.objects.size(); ++i) {
    if (scene.objects[i].floor_index != floor) continue;
    boxes_.push_back(scene.objects[i].aabb);
    box_objects_.push_back(static_cast<std::int32_t>(i));
  }

  grid_bounds_ = footprint_.inset(-0.1);
  nx_ = std::max(1, static_cast<int>(std::ceil(grid_bounds_.width() / cell_)));
  ny_ = std::max(1, static_cast<int>(std::ceil(grid_bounds_.height() / cell_)));
  const std::size_t ncell = static_cast<std::size_t>(nx_) * static_cast<std::size_t>(ny_);
  std::vector<std::vector<std::uint32_t>> cells(ncell);
  for (std::size_t i = 0; i < boxes_.size(); ++i) {
    const Box3& b = boxes_[i];
    const int cx0 = std::clamp(static_cast<int>(std::floor((b.min.x - grid_bounds_.x0) / cell_)), 0, nx_ - 1);
    const int cx1 = std::clamp(static_cast<int>(std::floor((b.max.x - grid_bounds_.x0) / cell_)), 0, nx_ - 1);
    const int cy0 = std::clamp(static_cast<int>(std::floor((b.min.y - grid_bounds_.y0) / cell_)), 0, ny_ - 1);
    const int cy1 = std::clamp(static_cast<int>(std::floor((b.max.y - grid_bounds_.y0) / cell_)), 0, ny_ - 1);
    for (int cy = cy0; cy <= cy1; ++cy) {
      for (int cx = cx0; cx <= cx1; ++cx) {
        cells[static_cast<std::size_t>(cy) * static_cast<std::size_t>(nx_) + static_cast<std::size_t>(cx)]
            .push_back(static_cast<std::uint32_t>(i));
      }
    }
  }
  cell_start_.reserve(ncell + 1);
  for (const auto& c : cells) {
    cell_start_.push_back(static_cast<std::uint32_t>(cell_boxes_.size()));
    cell_boxes_.insert(cell_boxes_.end(), c.begin(), c.end());
  }
  cell_start_.push_back(static_cast<std::uint32_t>(cell_boxes_.size()));
}

inline void FloorGeometry::consider_box(const Ray& ray, const Vec3& inv, std::uint32_t i, RayHit& best) const {
  const Box3& b = boxes_[i];
  const Vec3& o = ray.origin;
  // inv is finite on every axis for all but axis-parallel rays; those take the exact path only.
  if (std::isfinite(inv.x + inv.y + inv.z)) {
    const double tx0 = (b.min.x - o.x) * inv.x, tx1 = (b.max.x - o.x) * inv.x;
    const double ty0 = (b.min.y - o.y) * inv.y, ty1 = (b.max.y - o.y) * inv.y;
    const double tz0 = (b.min.z - o.z) * inv.z, tz1 = (b.max.z - o.z) * inv.z;
    const double near = std::max(std::max(std::min(tx0, tx1), std::min(ty0, ty1)), std::min(tz0, tz1));
    const double far = std::min(std::min(std::max(tx0, tx1), std::max(ty0, ty1)), std::max(tz0, tz1));
    if (near > far || near < 1e-9 || near > best.t) return;
  }
  const auto hit = intersect(ray, inv, b);
  if (!hit) return;
  const bool box_best = best.kind == SurfaceKind::Object || best.kind == SurfaceKind::Wall;
  if (hit->t < best.t || (hit->t == best.t && (!box_best || static_cast<std::int32_t>(i) < best.box))) {
    best.t = hit->t;
    best.axis = hit->axis;
    best.object = box_objects_[i];
    best.kind = best.object >= 0 ? SurfaceKind::Object : SurfaceKind::Wall;
    best.box = static_cast<std::int32_t>(i);
  }
}

inline void FloorGeometry::test_cell(const Ray& ray, const Vec3& inv, int cx, int cy, RayHit& best) const {
  const std::size_t c = static_cast<std::size_t>(cy) * static_cast<std::size_t>(nx_) + static_cast<std::size_t>(cx);
  for (std::uint32_t k = cell_start_[c]; k < cell_start_[c + 1]; ++k) consider_box(ray, inv, cell_boxes_[k], best);
}

inline void FloorGeometry::hit_planes(const Ray& ray, RayHit& best) const {
  const Vec3& o = ray.origin;
  const Vec3& d = ray.dir;
  auto plane = [&](double z, SurfaceKind kind) {
    const double t = (z - o.z) / d.z;
    if (!(t > 1e-9) || t >= best.t) return;
    const Vec3 p = o + d * t;
    if (footprint_.contains(Vec2{p.x, p.y})) {
      best = RayHit{t, kind, 2, -1, -1};
    }
  };
  if (d.z < 0.0) plane(z0_, SurfaceKind::FloorPlane);
  if (d.z > 0.0) plane(z1_, SurfaceKind::Ceiling);
}

RayHit FloorGeometry::cast_candidates(const Ray& ray, std::span<const Candidate> candidates) const {
  RayHit best;
  best.t = kInf;
  hit_planes(ray, best);
  const Vec3 inv{1.0 / ray.dir.x, 1.0 / ray.dir.y, 1.0 / ray.dir.z};
  const double len = norm(ray.dir);
  for (const Candidate& c : candidates) {
    if (c.distance > best.t * len * (1.0 + 1e-9) + 1e-9) break;
    consider_box(ray, inv, c.box, best);
  }
  return best;
}

RayHit FloorGeometry::cast(const Ray& ray) const {
  RayHit best;
  best.t = kInf;
  const Vec3& o = ray.origin;
  const Vec3& d = ray.dir;
  hit_planes(ray, best);

  // Clip the ray to the grid in xy.
  double t_in = 0.0, t_out = kInf;
  const double ox[2] = {o.x, o.y}, dx[2] = {d.x, d.y};
  const double lo[2] = {grid_bounds_.x0, grid_bounds_.y0}, hi[2] = {grid_bounds_.x1, grid_bounds_.y1};
  for (int a = 0; a < 2; ++a) {
    if (dx[a] == 0.0) {
      if (ox[a] < lo[a] || ox[a] > hi[a]) return best;
      continue;
    }
    double t0 = (lo[a] - ox[a]) / dx[a], t1 = (hi[a] - ox[a]) / dx[a];
    if (t0 > t1) std::swap(t0, t1);
    t_in = std::max(t_in, t0);
    t_out = std::min(t_out, t1);
  }
  if (t_in > t_out) return best;

  const Vec3 p = o + d * t_in;
  // p lies inside the grid up to rounding, so truncation matches floor after the clamp.
  int cx = std::clamp(static_cast<int>((p.x - grid_bounds_.x0) / cell_), 0, nx_ - 1);
  int cy = std::clamp(static_cast<int>((p.y - grid_bounds_.y0) / cell_), 0, ny_ - 1);
  const int step_x = d.x > 0.0 ? 1 : -1;
  const int step_y = d.y > 0.0 ? 1 : -1;
  double next_x = d.x != 0.0 ? (grid_bounds_.x0 + (cx + (d.x > 0.0 ? 1 : 0)) * cell_ - o.x) / d.x : kInf;
  double next_y = d.y != 0.0 ? (grid_bounds_.y0 + (cy + (d.y > 0.0 ? 1 : 0)) * cell_ - o.y) / d.y : kInf;
  const double delta_x = d.x != 0.0 ? cell_ / std::abs(d.x) : kInf;
  const double delta_y = d.y != 0.0 ? cell_ / std::abs(d.y) : kInf;
  double t_cell = t_in;
  const Vec3 inv{1.0 / d.x, 1.0 / d.y, 1.0 / d.z};
  while (true) {
    if (t_cell > best.t) break;
    test_cell(ray, inv, cx, cy, best);
    const double t_exit = std::min(next_x, next_y);
    if (best.t <= t_exit || t_exit > t_out) break;
    if (next_x < next_y) {
      cx += step_x;
      t_cell = next_x;
      next_x += delta_x;
    } else {
      cy += step_y;
      t_cell = next_y;
      next_y += delta_y;
    }
    if (cx < 0 || cx >= nx_ || cy < 0 || cy >= ny_) break;
  }
  return best;
}

int floor_of_position(const Scene& scene, const Vec3& p) {
  int f = 0;
  for (const auto& fl : scene.floors) {
    if (p.z >= fl.elevation_z) f = fl.index;
  }
  return f;
}

void check_pose(const Scene& scene, const CameraPose& pose) {
  pose.validate();
  const Box3 env = building_envelope(scene);
  const Vec3& p = pose.position;
  if (p.x < env.min.x || p.x > env.max.x || p.y < env.min.y || p.y > env.max.y || p.z < env.min.z ||
      p.z > env.max.z) {
    throw Error(ErrorCode::PoseOutOfBounds,
                fmt::format("camera position ({}, {}, {}) outside the building envelope", p.x, p.y, p.z));
  }
}

CameraRig::CameraRig(const CameraPose& pose, int w, int h)
    : origin(pose.position),
      forward(view_direction(pose.yaw, pose.pitch)),
      right(normalized(cross(forward, Vec3{0.0, 0.0, 1.0}))),
      up(cross(right, forward)),
      tan_half_h(std::tan(deg2rad(pose.fov) * 0.5)),
      tan_half_v(tan_half_h * h / w),
      width(w),
      height(h) {}

Ray CameraRig::pixel_ray(int x, int y) const {
  const double u = (2.0 * (x + 0.5) / width - 1.0) * tan_half_h;
  const double v = (1.0 - 2.0 * (y + 0.5) / height) * tan_half_v;
  return {origin, forward + right * u + up * v};
}

std::optional<Vec2> CameraRig::project(Vec3 p) const {
  const Vec3 d = p - origin;
  const double z = dot(d, forward);
  if (z <= 1e-6) return std::nullopt;
  const double x = dot(d, right) / z;
  const double y = dot(d, up) / z;
  return Vec2{(x / tan_half_h + 1.0) * width * 0.5, (1.0 - y / tan_half_v) * height * 0.5};
}

Raster render_view_raster(const FloorGeometry& geom, const Scene& scene, const CameraPose& pose,
                          int resolution) {
  const CameraRig rig(pose, resolution, resolution);
  Raster out{Image(resolution, resolution, style::kBackground),
             IdBuffer{resolution, resolution,
                      std::vector<std::int32_t>(static_cast<std::size_t>(resolution) * static_cast<std::size_t>(resolution), -1)}};
  std::array<std::array<Rgb, 3>, kAllColors.size()> object_shades;
  std::array<Rgb, 3> wall_shades;
  for (int axis = 0; axis < 3; ++axis) {
    for (Color c : kAllColors) object_shades[static_cast<std::size_t>(c)][axis] = shade(palette_rgb(c), axis);
    wall_shades[axis] = shade(style::kViewWall, axis);
  }
  auto color_of = [&](const RayHit& hit) {
    switch (hit.kind) {
      case SurfaceKind::Object:
        return object_shades[static_cast<std::size_t>(scene.objects[static_cast<std::size_t>(hit.object)].color)][hit.axis];
      case SurfaceKind::Wall: return wall_shades[hit.axis];
      case SurfaceKind::FloorPlane: return style::kViewFloor;
      case SurfaceKind::Ceiling: return style::kViewCeiling;
      case SurfaceKind::None: break;
    }
    return style::kBackground;
  };
  // Conservative screen bounds per box; boxes reaching behind the camera cover the whole frame.
  const auto& boxes = geom.boxes();
  struct Bounds {
    double x0, y0, x1, y1, distance;
  };
  std::vector<Bounds> bounds(boxes.size());
  const double full = static_cast<double>(resolution);
  for (std::size_t i = 0; i < boxes.size(); ++i) {
    const Box3& b = boxes[i];
    Bounds& r = bounds[i];
    const Vec3 nearest{std::clamp(rig.origin.x, b.min.x, b.max.x), std::clamp(rig.origin.y, b.min.y, b.max.y),
                       std::clamp(rig.origin.z, b.min.z, b.max.z)};
    r.distance = norm(nearest - rig.origin);
    r.x0 = r.y0 = kInf;
    r.x1 = r.y1 = -kInf;
    bool behind = false;
    for (int corner = 0; corner < 8 && !behind; ++corner) {
      const Vec3 p{corner & 1 ? b.max.x : b.min.x, corner & 2 ? b.max.y : b.min.y, corner & 4 ? b.max.z : b.min.z};
      const Vec3 d = p - rig.origin;
      const double z = dot(d, rig.forward);
      if (z <= 1e-6) {
        behind = true;
        break;
      }
      const double sx = (dot(d, rig.right) / z / rig.tan_half_h + 1.0) * full * 0.5;
      const double sy = (1.0 - dot(d, rig.up) / z / rig.tan_half_v) * full * 0.5;
      r.x0 = std::min(r.x0, sx);
      r.x1 = std::max(r.x1, sx);
      r.y0 = std::min(r.y0, sy);
      r.y1 = std::max(r.y1, sy);
    }
    if (behind) {
      r.x0 = r.y0 = -kInf;
      r.x1 = r.y1 = kInf;
    }
  }

  constexpr int kTile = 16;
  std::vector<FloorGeometry::Candidate> candidates;
  for (int ty = 0; ty < resolution; ty += kTile) {
    for (int tx = 0; tx < resolution; tx += kTile) {
      const int tx1 = std::min(resolution, tx + kTile), ty1 = std::min(resolution, ty + kTile);
      // Pixel centers sit at x + 0.5; one pixel of slack absorbs rounding.
      candidates.clear();
      for (std::size_t i = 0; i < boxes.size(); ++i) {
        const Bounds& r = bounds[i];
        if (r.x1 < tx - 0.5 || r.x0 > tx1 + 0.5 || r.y1 < ty - 0.5 || r.y0 > ty1 + 0.5) continue;
        candidates.push_back({r.distance, static_cast<std::uint32_t>(i)});
      }
      std::ranges::sort(candidates, [](const auto& a, const auto& b) {
        return a.distance < b.distance || (a.distance == b.distance && a.box < b.box);
      });
      for (int y = ty; y < ty1; ++y) {
        for (int x = tx; x < tx1; ++x) {
          const RayHit hit = geom.cast_candidates(rig.pixel_ray(x, y), candidates);
          if (hit.kind == SurfaceKind::None) continue;
          out.image.set(x, y, color_of(hit));
          out.ids.ids[static_cast<std::size_t>(y) * static_cast<std::size_t>(resolution) + static_cast<std::size_t>(x)] =
              hit.object;
        }
      }
    }
  }
  return out;
}

Raster render_view_raster(const Scene& scene, const CameraPose& pose, int resolution) {
  check_pose(scene, pose);
  const FloorGeometry geom(scene, floor_of_position(scene, pose.position));
  return render_view_raster(geom, scene, pose, resolution);
}

Image render_view(const Scene& scene, const CameraPose& pose, int resolution) {
  return render_view_raster(scene, pose, resolution).image;
}

int count_visible_pixels(const FloorGeometry& geom, const Scene& scene, const CameraPose& pose,
                         int resolution, std::int32_t object_index) {
  const CameraRig rig(pose, resolution, resolution);
  const Box3& b = scene.objects[static_cast<std::size_t>(object_index)].aabb;
  int x0 = 0, x1 = resolution, y0 = 0, y1 = resolution;
  double minx = kInf, maxx = -kInf, miny = kInf, maxy = -kInf;
  bool behind = false;
  for (int c = 0; c < 8; ++c) {
    const Vec3 corner{(c & 1) ? b.max.x : b.min.x, (c & 2) ? b.max.y : b.min.y, (c & 4) ? b.max.z : b.min.z};
    const auto px = rig.project(corner);
    if (!px) {
      behind = true;
      break;
    }
    minx = std::min(minx, px->x);
    maxx = std::max(maxx, px->x);
    miny = std::min(miny, px->y);
    maxy = std::max(maxy, px->y);
  }
  if (!behind) {
    x0 = std::clamp(static_cast<int>(std::floor(minx)) - 1, 0, resolution);
    x1 = std::clamp(static_cast<int>(std::ceil(maxx)) + 1, 0, resolution);
    y0 = std::clamp(static_cast<int>(std::floor(miny)) - 1, 0, resolution);
    y1 = std::clamp(static_cast<int>(std::ceil(maxy)) + 1, 0, resolution);
  }
  int count = 0;
  for (int y = y0; y < y1; ++y) {
    for (int x = x0; x < x1; ++x) {
      if (geom.cast(rig.pixel_ray(x, y)).object == object_index) ++count;
    }
  }
  return count;
}

}  // namespace arena
