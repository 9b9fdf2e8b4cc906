// Copyright (C) 2026 erupoint contributors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

namespace erupoint::geom {

constexpr double kPi = 3.14159265358979323846;

inline double deg_to_rad(double d) { return d * (kPi / 180.0); }
inline double rad_to_deg(double r) { return r * (180.0 / kPi); }

// Meters, z-up right-handed frame.
struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
  Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
  Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
  Vec3 operator/(double s) const { return {x / s, y / s, z / s}; }
  Vec3 operator-() const { return {-x, -y, -z}; }
  Vec3& operator+=(const Vec3& o) {
    x += o.x;
    y += o.y;
    z += o.z;
    return *this;
  }

  double dot(const Vec3& o) const { return x * o.x + y * o.y + z * o.z; }
  Vec3 cross(const Vec3& o) const {
    return {y * o.z - z * o.y, z * o.x - x * o.z, x * o.y - y * o.x};
  }
  double squared_norm() const { return dot(*this); }
  double norm() const { return std::sqrt(squared_norm()); }
  double norm_xy() const { return std::sqrt(x * x + y * y); }
  Vec3 normalized() const {
    double n = norm();
    return n > 0.0 ? *this / n : Vec3{};
  }
  bool finite() const {
    return std::isfinite(x) && std::isfinite(y) && std::isfinite(z);
  }
  bool is_zero() const { return x == 0.0 && y == 0.0 && z == 0.0; }
};

using Point3 = Vec3;

inline Vec3 operator*(double s, const Vec3& v) { return v * s; }
inline bool operator==(const Vec3& a, const Vec3& b) {
  return a.x == b.x && a.y == b.y && a.z == b.z;
}

// Axis-aligned box, min <= max componentwise.
struct Aabb {
  Vec3 min;
  Vec3 max;

  Vec3 center() const { return (min + max) * 0.5; }
  Vec3 size() const { return max - min; }
  double volume() const {
    Vec3 s = size();
    return s.x * s.y * s.z;
  }
  bool valid() const {
    return min.finite() && max.finite() && min.x <= max.x && min.y <= max.y &&
           min.z <= max.z;
  }
  bool contains(const Vec3& p) const {
    return p.x >= min.x && p.x <= max.x && p.y >= min.y && p.y <= max.y &&
           p.z >= min.z && p.z <= max.z;
  }
  Aabb expanded(double d) const {
    return {{min.x - d, min.y - d, min.z - d}, {max.x + d, max.y + d, max.z + d}};
  }
  void grow(const Vec3& p) {
    min.x = std::min(min.x, p.x);
    min.y = std::min(min.y, p.y);
    min.z = std::min(min.z, p.z);
    max.x = std::max(max.x, p.x);
    max.y = std::max(max.y, p.y);
    max.z = std::max(max.z, p.z);
  }
  static Aabb empty() {
    double inf = std::numeric_limits<double>::infinity();
    return {{inf, inf, inf}, {-inf, -inf, -inf}};
  }
};

// Unit-direction ray.
struct Ray {
  Vec3 origin;
  Vec3 dir;

  // Normalizes; throws InvalidArgument on a zero direction.
  static Ray make(const Vec3& origin, const Vec3& dir);
  static Ray through(const Vec3& origin, const Vec3& point) {
    return make(origin, point - origin);
  }
  Vec3 at(double t) const { return origin + dir * t; }
};

// Proper rigid motion: p -> R p + t, row-major R with det +1.
struct RigidTransform {
  std::array<double, 9> r{1, 0, 0, 0, 1, 0, 0, 0, 1};
  Vec3 t;

  static RigidTransform identity() { return {}; }
  static RigidTransform translation(const Vec3& t);
  static RigidTransform rot_x(double deg);
  static RigidTransform rot_y(double deg);
  static RigidTransform rot_z(double deg);
  // Rotation applied about a pivot point instead of the origin.
  static RigidTransform about_point(const RigidTransform& rot, const Vec3& pivot);

  Vec3 rotate(const Vec3& v) const {
    return {r[0] * v.x + r[1] * v.y + r[2] * v.z,
            r[3] * v.x + r[4] * v.y + r[5] * v.z,
            r[6] * v.x + r[7] * v.y + r[8] * v.z};
  }
  Vec3 apply(const Vec3& p) const { return rotate(p) + t; }
  // this ∘ other: other first, then this.
  RigidTransform compose(const RigidTransform& other) const;
  // Max deviation of RᵀR from I; 0 for an exact rotation.
  double orthonormal_error() const;
  double det() const;
};

// Scene/agent representation: positions plus optional per-point features.
// Feature vectors, when present, have exactly one entry per point.
struct PointCloud {
  std::vector<Vec3> points;
  std::vector<Vec3> colors;  // RGB in [0,1]; empty when absent
  std::vector<Vec3> normals; // unit, or zero on padding points; empty when absent

  size_t size() const { return points.size(); }
  bool empty() const { return points.empty(); }
  bool has_colors() const { return !colors.empty(); }
  bool has_normals() const { return !normals.empty(); }

  void append(const PointCloud& other);
  PointCloud transformed(const RigidTransform& tf) const;
  Aabb bounds() const;
  // Throws InvalidArgument when feature counts disagree or values are
  // non-finite / out of range.
  void validate() const;
};

// One representative point per occupied voxel: member centroid, averaged
// colors, averaged-then-renormalized normals (zero when degenerate).
// Output ordered by ascending (ix, iy, iz) voxel key.
PointCloud voxel_downsample(const PointCloud& pc, double voxel_size);

// Exactly n points: a seeded uniform subset without replacement when the
// cloud is larger, the original points followed by all-zero padding when
// smaller, the identity when equal.
PointCloud resample_fixed(const PointCloud& pc, size_t n, uint64_t seed);

// Slab test. Hit iff the (t_near, t_far) interval reaches t >= 0; grazing
// contact counts as a hit.
std::optional<std::pair<double, double>> ray_aabb_intersect(const Ray& r,
                                                            const Aabb& b);

// Intersection volume over union volume; 0 for disjoint boxes and for a
// degenerate zero-volume union.
double aabb_iou(const Aabb& a, const Aabb& b);

// Degrees in [0, 180]; throws InvalidArgument on a zero vector.
double angle_between_deg(const Vec3& u, const Vec3& v);

// Signed angle of v above the horizontal plane, degrees in [-90, 90].
double elevation_deg_of(const Vec3& v);

// Yaw (degrees, in [0, 360)) rotating local +Y onto the horizontal direction
// from `from` to `to`.
double yaw_facing_deg(const Vec3& from, const Vec3& to);

} // namespace erupoint::geom
