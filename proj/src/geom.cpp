// Copyright (C) 2026 erupoint contributors
// SPDX-License-Identifier: Apache-2.0
#include "erupoint/geom.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <tuple>

#include "erupoint/error.hpp"
#include "erupoint/rng.hpp"

namespace erupoint::geom {

Ray Ray::make(const Vec3& origin, const Vec3& dir) {
  double n = dir.norm();
  if (!(n > 0.0) || !dir.finite() || !origin.finite()) {
    throw InvalidArgument("ray requires a finite origin and non-zero direction");
  }
  return Ray{origin, dir / n};
}

RigidTransform RigidTransform::translation(const Vec3& t) {
  RigidTransform tf;
  tf.t = t;
  return tf;
}

RigidTransform RigidTransform::rot_x(double deg) {
  double c = std::cos(deg_to_rad(deg)), s = std::sin(deg_to_rad(deg));
  RigidTransform tf;
  tf.r = {1, 0, 0, 0, c, -s, 0, s, c};
  return tf;
}

RigidTransform RigidTransform::rot_y(double deg) {
  double c = std::cos(deg_to_rad(deg)), s = std::sin(deg_to_rad(deg));
  RigidTransform tf;
  tf.r = {c, 0, s, 0, 1, 0, -s, 0, c};
  return tf;
}

RigidTransform RigidTransform::rot_z(double deg) {
  double c = std::cos(deg_to_rad(deg)), s = std::sin(deg_to_rad(deg));
  RigidTransform tf;
  tf.r = {c, -s, 0, s, c, 0, 0, 0, 1};
  return tf;
}

RigidTransform RigidTransform::about_point(const RigidTransform& rot,
                                           const Vec3& pivot) {
  RigidTransform tf = rot;
  tf.t = pivot - rot.rotate(pivot) + rot.t;
  return tf;
}

RigidTransform RigidTransform::compose(const RigidTransform& o) const {
  RigidTransform out;
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      double v = 0.0;
      for (int k = 0; k < 3; ++k) v += r[3 * i + k] * o.r[3 * k + j];
      out.r[3 * i + j] = v;
    }
  }
  out.t = rotate(o.t) + t;
  return out;
}

double RigidTransform::orthonormal_error() const {
  double worst = 0.0;
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      double v = 0.0;
      for (int k = 0; k < 3; ++k) v += r[3 * k + i] * r[3 * k + j];
      worst = std::max(worst, std::abs(v - (i == j ? 1.0 : 0.0)));
    }
  }
  return worst;
}

double RigidTransform::det() const {
  return r[0] * (r[4] * r[8] - r[5] * r[7]) - r[1] * (r[3] * r[8] - r[5] * r[6]) +
         r[2] * (r[3] * r[7] - r[4] * r[6]);
}

void PointCloud::append(const PointCloud& other) {
  if (points.empty()) {
    *this = other;
    return;
  }
  // Feature presence must agree; appending a featureless cloud to a featured
  // one would silently break the one-entry-per-point invariant.
  if (has_colors() != other.has_colors() || has_normals() != other.has_normals()) {
    throw InvalidArgument("append: mismatched feature channels");
  }
  points.insert(points.end(), other.points.begin(), other.points.end());
  colors.insert(colors.end(), other.colors.begin(), other.colors.end());
  normals.insert(normals.end(), other.normals.begin(), other.normals.end());
}

PointCloud PointCloud::transformed(const RigidTransform& tf) const {
  PointCloud out;
  out.points.reserve(points.size());
  for (const Vec3& p : points) out.points.push_back(tf.apply(p));
  out.colors = colors;
  if (has_normals()) {
    out.normals.reserve(normals.size());
    for (const Vec3& n : normals) out.normals.push_back(tf.rotate(n));
  }
  return out;
}

Aabb PointCloud::bounds() const {
  Aabb b = Aabb::empty();
  for (const Vec3& p : points) b.grow(p);
  return b;
}

void PointCloud::validate() const {
  if (has_colors() && colors.size() != points.size()) {
    throw InvalidArgument("colors must have one entry per point");
  }
  if (has_normals() && normals.size() != points.size()) {
    throw InvalidArgument("normals must have one entry per point");
  }
  for (const Vec3& p : points) {
    if (!p.finite()) throw InvalidArgument("non-finite point coordinate");
  }
  for (const Vec3& c : colors) {
    if (!c.finite() || c.x < 0 || c.x > 1 || c.y < 0 || c.y > 1 || c.z < 0 ||
        c.z > 1) {
      throw InvalidArgument("color component outside [0,1]");
    }
  }
  for (const Vec3& n : normals) {
    if (!n.finite()) throw InvalidArgument("non-finite normal");
    if (!n.is_zero() && std::abs(n.norm() - 1.0) > 1e-6) {
      throw InvalidArgument("normal is neither unit nor zero padding");
    }
  }
}

namespace {

struct VoxelKey {
  int64_t ix, iy, iz;
  bool operator<(const VoxelKey& o) const {
    return std::tie(ix, iy, iz) < std::tie(o.ix, o.iy, o.iz);
  }
  bool operator==(const VoxelKey& o) const {
    return ix == o.ix && iy == o.iy && iz == o.iz;
  }
};

} // namespace

PointCloud voxel_downsample(const PointCloud& pc, double voxel_size) {
  if (!(voxel_size > 0.0)) throw InvalidArgument("voxel_size must be positive");
  if (pc.empty()) throw InvalidArgument("voxel_downsample: empty cloud");

  std::vector<std::pair<VoxelKey, uint32_t>> keyed(pc.size());
  double inv = 1.0 / voxel_size;
  for (size_t i = 0; i < pc.size(); ++i) {
    const Vec3& p = pc.points[i];
    keyed[i] = {{static_cast<int64_t>(std::floor(p.x * inv)),
                 static_cast<int64_t>(std::floor(p.y * inv)),
                 static_cast<int64_t>(std::floor(p.z * inv))},
                static_cast<uint32_t>(i)};
  }
  std::sort(keyed.begin(), keyed.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });

  PointCloud out;
  size_t i = 0;
  while (i < keyed.size()) {
    size_t j = i;
    Vec3 pos{}, col{}, nrm{};
    while (j < keyed.size() && keyed[j].first == keyed[i].first) {
      uint32_t idx = keyed[j].second;
      pos += pc.points[idx];
      if (pc.has_colors()) col += pc.colors[idx];
      if (pc.has_normals()) nrm += pc.normals[idx];
      ++j;
    }
    double n = static_cast<double>(j - i);
    out.points.push_back(pos / n);
    if (pc.has_colors()) out.colors.push_back(col / n);
    if (pc.has_normals()) {
      double len = nrm.norm();
      out.normals.push_back(len > 1e-12 ? nrm / len : Vec3{});
    }
    i = j;
  }
  return out;
}

PointCloud resample_fixed(const PointCloud& pc, size_t n, uint64_t seed) {
  if (n == 0) throw InvalidArgument("resample_fixed: n must be positive");

  PointCloud out;
  if (pc.size() <= n) {
    out = pc;
    size_t pad = n - pc.size();
    out.points.resize(out.points.size() + pad, Vec3{});
    if (pc.has_colors()) out.colors.resize(out.points.size(), Vec3{});
    if (pc.has_normals()) out.normals.resize(out.points.size(), Vec3{});
    return out;
  }

  // Partial Fisher-Yates over indices, then restored to input order so the
  // subset is stable under the original point ordering.
  std::vector<uint32_t> idx(pc.size());
  std::iota(idx.begin(), idx.end(), 0u);
  Rng rng(seed);
  for (size_t i = 0; i < n; ++i) {
    size_t j = i + rng.uniform_u32(static_cast<uint32_t>(pc.size() - i));
    std::swap(idx[i], idx[j]);
  }
  idx.resize(n);
  std::sort(idx.begin(), idx.end());

  out.points.reserve(n);
  for (uint32_t i : idx) out.points.push_back(pc.points[i]);
  if (pc.has_colors()) {
    out.colors.reserve(n);
    for (uint32_t i : idx) out.colors.push_back(pc.colors[i]);
  }
  if (pc.has_normals()) {
    out.normals.reserve(n);
    for (uint32_t i : idx) out.normals.push_back(pc.normals[i]);
  }
  return out;
}

std::optional<std::pair<double, double>> ray_aabb_intersect(const Ray& r,
                                                            const Aabb& b) {
  double t_near = -std::numeric_limits<double>::infinity();
  double t_far = std::numeric_limits<double>::infinity();
  const double o[3] = {r.origin.x, r.origin.y, r.origin.z};
  const double d[3] = {r.dir.x, r.dir.y, r.dir.z};
  const double lo[3] = {b.min.x, b.min.y, b.min.z};
  const double hi[3] = {b.max.x, b.max.y, b.max.z};

  for (int a = 0; a < 3; ++a) {
    if (d[a] == 0.0) {
      // Parallel to the slab: miss unless the origin lies inside it.
      if (o[a] < lo[a] || o[a] > hi[a]) return std::nullopt;
      continue;
    }
    double inv = 1.0 / d[a];
    double t0 = (lo[a] - o[a]) * inv;
    double t1 = (hi[a] - o[a]) * inv;
    if (t0 > t1) std::swap(t0, t1);
    t_near = std::max(t_near, t0);
    t_far = std::min(t_far, t1);
    if (t_near > t_far) return std::nullopt;
  }
  if (t_far < 0.0) return std::nullopt;
  return std::make_pair(t_near, t_far);
}

double aabb_iou(const Aabb& a, const Aabb& b) {
  double ix = std::min(a.max.x, b.max.x) - std::max(a.min.x, b.min.x);
  double iy = std::min(a.max.y, b.max.y) - std::max(a.min.y, b.min.y);
  double iz = std::min(a.max.z, b.max.z) - std::max(a.min.z, b.min.z);
  if (ix <= 0.0 || iy <= 0.0 || iz <= 0.0) return 0.0;
  double inter = ix * iy * iz;
  double uni = a.volume() + b.volume() - inter;
  if (uni <= 0.0) return 0.0;
  return inter / uni;
}

double angle_between_deg(const Vec3& u, const Vec3& v) {
  double nu = u.norm(), nv = v.norm();
  if (!(nu > 0.0) || !(nv > 0.0)) {
    throw InvalidArgument("angle_between: zero vector");
  }
  double c = u.dot(v) / (nu * nv);
  c = std::clamp(c, -1.0, 1.0);
  return rad_to_deg(std::acos(c));
}

double elevation_deg_of(const Vec3& v) {
  return rad_to_deg(std::atan2(v.z, v.norm_xy()));
}

double yaw_facing_deg(const Vec3& from, const Vec3& to) {
  double dx = to.x - from.x, dy = to.y - from.y;
  // Local forward is +Y, so a target along +Y needs yaw 0.
  double yaw = rad_to_deg(std::atan2(dy, dx)) - 90.0;
  yaw = std::fmod(yaw, 360.0);
  if (yaw < 0.0) yaw += 360.0;
  return yaw;
}

} // namespace erupoint::geom
