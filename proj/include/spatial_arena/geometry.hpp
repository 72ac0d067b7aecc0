#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>

namespace arena {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  friend Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
  friend Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
  friend Vec2 operator*(Vec2 a, double s) { return {a.x * s, a.y * s}; }
  friend bool operator==(Vec2, Vec2) = default;
};

inline double norm(Vec2 v) { return std::hypot(v.x, v.y); }

struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  friend Vec3 operator+(Vec3 a, Vec3 b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
  friend Vec3 operator-(Vec3 a, Vec3 b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
  friend Vec3 operator*(Vec3 a, double s) { return {a.x * s, a.y * s, a.z * s}; }
  friend bool operator==(Vec3, Vec3) = default;
};

inline double dot(Vec3 a, Vec3 b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
inline Vec3 cross(Vec3 a, Vec3 b) {
  return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}
inline double norm(Vec3 v) { return std::sqrt(dot(v, v)); }
inline Vec3 normalized(Vec3 v) { return v * (1.0 / norm(v)); }

inline double deg2rad(double d) { return d * std::numbers::pi / 180.0; }
inline double rad2deg(double r) { return r * 180.0 / std::numbers::pi; }

/// Axis-aligned rectangle in world meters, half-open semantics for rasterization.
struct Rect {
  double x0 = 0.0;
  double y0 = 0.0;
  double x1 = 0.0;
  double y1 = 0.0;

  double width() const { return x1 - x0; }
  double height() const { return y1 - y0; }
  double area() const { return std::max(0.0, width()) * std::max(0.0, height()); }
  Vec2 center() const { return {(x0 + x1) * 0.5, (y0 + y1) * 0.5}; }
  bool contains(Vec2 p) const { return p.x >= x0 && p.x <= x1 && p.y >= y0 && p.y <= y1; }
  bool contains(const Rect& r) const {
    return r.x0 >= x0 && r.x1 <= x1 && r.y0 >= y0 && r.y1 <= y1;
  }
  Rect inset(double d) const { return {x0 + d, y0 + d, x1 - d, y1 - d}; }
  friend bool operator==(const Rect&, const Rect&) = default;
};

inline Rect intersection(const Rect& a, const Rect& b) {
  return {std::max(a.x0, b.x0), std::max(a.y0, b.y0), std::min(a.x1, b.x1), std::min(a.y1, b.y1)};
}

inline Rect bounding_union(const Rect& a, const Rect& b) {
  return {std::min(a.x0, b.x0), std::min(a.y0, b.y0), std::max(a.x1, b.x1), std::max(a.y1, b.y1)};
}

struct Box3 {
  Vec3 min;
  Vec3 max;

  Vec3 center() const { return (min + max) * 0.5; }
  Rect footprint() const { return {min.x, min.y, max.x, max.y}; }
  friend bool operator==(const Box3&, const Box3&) = default;
};

/// Penetration depth of two boxes along their least-overlapping axis; <= 0 when disjoint.
inline double penetration(const Box3& a, const Box3& b) {
  const double ox = std::min(a.max.x, b.max.x) - std::max(a.min.x, b.min.x);
  const double oy = std::min(a.max.y, b.max.y) - std::max(a.min.y, b.min.y);
  const double oz = std::min(a.max.z, b.max.z) - std::max(a.min.z, b.min.z);
  return std::min({ox, oy, oz});
}

/// 2D box in BEV pixel coordinates: [x_min, y_min, x_max, y_max].
struct BBox2D {
  double x_min = 0.0;
  double y_min = 0.0;
  double x_max = 0.0;
  double y_max = 0.0;

  double width() const { return x_max - x_min; }
  double height() const { return y_max - y_min; }
  double area() const { return std::max(0.0, width()) * std::max(0.0, height()); }
  Vec2 center() const { return {(x_min + x_max) * 0.5, (y_min + y_max) * 0.5}; }
  bool valid() const { return x_min < x_max && y_min < y_max; }
  friend bool operator==(const BBox2D&, const BBox2D&) = default;
};

inline double iou(const BBox2D& a, const BBox2D& b) {
  const double iw = std::min(a.x_max, b.x_max) - std::max(a.x_min, b.x_min);
  const double ih = std::min(a.y_max, b.y_max) - std::max(a.y_min, b.y_min);
  if (iw <= 0.0 || ih <= 0.0) return 0.0;
  const double inter = iw * ih;
  const double uni = a.area() + b.area() - inter;
  return uni > 0.0 ? inter / uni : 0.0;
}

struct ClampedBBox {
  BBox2D box;
  bool clamped = false;
};

/// Clamps a box to the [0, width] x [0, height] image rectangle.
inline ClampedBBox clamp_bbox(const BBox2D& b, double width, double height) {
  BBox2D c{std::clamp(b.x_min, 0.0, width), std::clamp(b.y_min, 0.0, height),
           std::clamp(b.x_max, 0.0, width), std::clamp(b.y_max, 0.0, height)};
  return {c, !(c == b)};
}

struct Ray {
  Vec3 origin;
  Vec3 dir;
};

struct SlabHit {
  double t = 0.0;
  int axis = 0;  // 0 = x face, 1 = y face, 2 = z face
};

/// Entry intersection given the precomputed reciprocal direction (components
/// where dir is 0 are ignored).
inline std::optional<SlabHit> intersect(const Ray& ray, const Vec3& inv_dir, const Box3& box, double t_min = 1e-9) {
  double t_enter = -std::numeric_limits<double>::infinity();
  double t_exit = std::numeric_limits<double>::infinity();
  int axis = -1;
  const double o[3] = {ray.origin.x, ray.origin.y, ray.origin.z};
  const double d[3] = {ray.dir.x, ray.dir.y, ray.dir.z};
  const double inv[3] = {inv_dir.x, inv_dir.y, inv_dir.z};
  const double lo[3] = {box.min.x, box.min.y, box.min.z};
  const double hi[3] = {box.max.x, box.max.y, box.max.z};
  for (int i = 0; i < 3; ++i) {
    if (d[i] == 0.0) {
      if (o[i] < lo[i] || o[i] > hi[i]) return std::nullopt;
      continue;
    }
    double t0 = (lo[i] - o[i]) * inv[i];
    double t1 = (hi[i] - o[i]) * inv[i];
    if (t0 > t1) std::swap(t0, t1);
    if (t0 > t_enter) {
      t_enter = t0;
      axis = i;
    }
    t_exit = std::min(t_exit, t1);
    if (t_enter > t_exit) return std::nullopt;
  }
  if (axis < 0 || t_enter < t_min) return std::nullopt;
  return SlabHit{t_enter, axis};
}

/// Entry intersection of a ray with a box. Boxes containing the origin are not hits.
inline std::optional<SlabHit> intersect(const Ray& ray, const Box3& box, double t_min = 1e-9) {
  const Vec3 inv{1.0 / ray.dir.x, 1.0 / ray.dir.y, 1.0 / ray.dir.z};
  return intersect(ray, inv, box, t_min);
}

}  // namespace arena
