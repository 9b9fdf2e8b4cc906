// Copyright (C) 2026 erupoint contributors
// SPDX-License-Identifier: Apache-2.0
#include "erupoint/vtl.hpp"

#include <algorithm>

#include "erupoint/error.hpp"
#include "erupoint/place.hpp"

namespace erupoint::vtl {

GestureRay gesture_ray(const Vec3& eye, const Vec3& fingertip) {
  if ((fingertip - eye).norm() < 1e-12) {
    throw InvalidArgument("gesture ray: eye and fingertip coincide");
  }
  return {Ray::through(eye, fingertip)};
}

GestureRay gesture_ray(const body::PosedAgent& agent) {
  return gesture_ray(agent.eye, agent.fingertip);
}

double vtl_score(const GestureRay& g, const Aabb& box) {
  Vec3 to_center = box.center() - g.ray.origin;
  if (to_center.dot(g.ray.dir) < 0.0) return 0.0;
  if (to_center.norm() < 1e-12) return 1.0; // origin at the center
  double theta = geom::angle_between_deg(g.ray.dir, to_center);
  double base = std::max(0.0, 1.0 - theta / kAngularCutoffDeg);
  bool hit = geom::ray_aabb_intersect(g.ray, box).has_value();
  return std::clamp(base + (hit ? 0.5 : 0.0), 0.0, 1.0);
}

std::vector<std::pair<int, double>> rank_objects(
    const GestureRay& g, const std::vector<place::SceneObject>& objects) {
  if (objects.empty()) throw InvalidArgument("rank_objects: no objects");
  std::vector<std::pair<int, double>> ranked;
  ranked.reserve(objects.size());
  for (const place::SceneObject& obj : objects) {
    ranked.emplace_back(obj.id, vtl_score(g, obj.box));
  }
  std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  return ranked;
}

} // namespace erupoint::vtl
