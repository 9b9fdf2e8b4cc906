// Copyright (C) 2026 erupoint contributors
// SPDX-License-Identifier: Apache-2.0
#include "erupoint/place.hpp"

#include <algorithm>
#include <cmath>

#include "erupoint/error.hpp"
#include "erupoint/rng.hpp"
#include "erupoint/vtl.hpp"

namespace erupoint::place {

namespace {

// Covers every profile when the true standing height is not yet known.
constexpr double kNominalAgentHeight = 2.0;

bool footprint_hits_box(const Vec3& position, double radius, double height,
                        const Aabb& box) {
  if (box.max.z < position.z || box.min.z > position.z + height) return false;
  double cx = std::clamp(position.x, box.min.x, box.max.x);
  double cy = std::clamp(position.y, box.min.y, box.max.y);
  double dx = position.x - cx, dy = position.y - cy;
  return dx * dx + dy * dy <= radius * radius;
}

} // namespace

Aabb Scene::bounds() const {
  if (!cloud.empty()) return cloud.bounds();
  Aabb b = Aabb::empty();
  for (const SceneObject& obj : objects) {
    b.grow(obj.box.min);
    b.grow(obj.box.max);
  }
  return b;
}

const SceneObject* Scene::find_object(int id) const {
  for (const SceneObject& obj : objects) {
    if (obj.id == id) return &obj;
  }
  return nullptr;
}

const SceneObject& Scene::object_or_throw(int id) const {
  const SceneObject* obj = find_object(id);
  if (!obj) {
    throw InvalidArgument("scene " + scene_id + " has no object " +
                          std::to_string(id));
  }
  return *obj;
}

bool line_of_sight_clear(const Vec3& eye, const SceneObject& target,
                         const std::vector<const SceneObject*>& obstacles) {
  Vec3 center = target.box.center();
  if ((center - eye).norm() < 1e-12) return true;
  geom::Ray ray = geom::Ray::through(eye, center);
  auto target_hit = geom::ray_aabb_intersect(ray, target.box);
  if (!target_hit) return false; // eye aimed away; treat as not visible
  double t_entry = std::max(target_hit->first, 0.0);
  for (const SceneObject* obs : obstacles) {
    auto hit = geom::ray_aabb_intersect(ray, obs->box);
    if (hit && hit->first < t_entry && hit->second > 0.0) return false;
  }
  return true;
}

PlacedGesture placed_gesture(const Placement& placement,
                             const body::AgentPool& pool) {
  const body::AgentRecord& rec = pool.record(placement.agent_index);
  geom::RigidTransform tf = geom::RigidTransform::rot_z(placement.yaw_deg);
  tf.t = placement.position;
  return {tf.apply(rec.eye), tf.apply(rec.fingertip)};
}

uint32_t solve_pointing(const Vec3& position, double yaw_deg,
                        const SceneObject& target, const body::AgentPool& pool,
                        uint64_t seed, const PlacementConfig& cfg) {
  if (!pool.grid_layout()) {
    throw InvalidArgument("solve_pointing needs a grid-indexed agent pool");
  }
  Rng rng(seed);
  Vec3 center = target.box.center();
  geom::RigidTransform yaw_tf = geom::RigidTransform::rot_z(yaw_deg);
  yaw_tf.t = position;

  uint32_t n_profiles =
      static_cast<uint32_t>(pool.size() / (2u * body::kElevationSteps));
  uint32_t profile = rng.uniform_u32(n_profiles);

  // Arm side: the one the target leans toward; coin flip when dead ahead.
  Vec3 right_dir = geom::RigidTransform::rot_z(yaw_deg).rotate({1, 0, 0});
  double lateral = (center - position).dot(right_dir);
  body::Side side;
  if (std::abs(lateral) < 0.02) {
    side = rng.coin() ? body::Side::Right : body::Side::Left;
  } else {
    side = lateral > 0.0 ? body::Side::Right : body::Side::Left;
  }

  // Aim elevation: grid entry whose stored eye-fingertip line best matches
  // the vertical angle toward the target center.
  int best_k = 0;
  double best_err = std::numeric_limits<double>::infinity();
  for (int k = 0; k < body::kElevationSteps; ++k) {
    uint32_t idx = pool.grid_index(static_cast<int>(profile), side,
                                   body::elevation_at(k));
    const body::AgentRecord& rec = pool.record(idx);
    double vtl_angle = geom::elevation_deg_of(rec.fingertip - rec.eye);
    Vec3 eye_w = yaw_tf.apply(rec.eye);
    double want = geom::elevation_deg_of(center - eye_w);
    double err = std::abs(vtl_angle - want);
    if (err < best_err) {
      best_err = err;
      best_k = k;
    }
  }

  for (int retry = 0; retry < cfg.max_pointing_retries; ++retry) {
    double delta = rng.uniform(-cfg.fluctuation_deg, cfg.fluctuation_deg);
    double elevation =
        body::snap_elevation(body::elevation_at(best_k) + delta);
    uint32_t idx =
        pool.grid_index(static_cast<int>(profile), side, elevation);
    const body::AgentRecord& rec = pool.record(idx);
    Vec3 eye_w = yaw_tf.apply(rec.eye);
    Vec3 tip_w = yaw_tf.apply(rec.fingertip);
    geom::Ray ray = geom::Ray::through(eye_w, tip_w);
    if (!geom::ray_aabb_intersect(ray, target.box)) continue;
    double angle = geom::angle_between_deg(ray.dir, center - eye_w);
    if (angle > cfg.max_ray_angle_deg) continue;
    return idx;
  }
  throw PointingInfeasible("no grid elevation yields a target-box hit");
}

PlacementResult sample_placements(const Scene& scene, const SceneObject& target,
                                  const body::AgentPool& pool, uint64_t seed,
                                  const PlacementConfig& cfg) {
  if (!scene.find_object(target.id)) {
    throw InvalidArgument("target does not belong to the scene");
  }
  if (pool.empty()) throw InvalidArgument("agent pool is empty");

  Rng rng(seed);
  size_t want = 3 + rng.uniform_u32(3); // uniform {3,4,5}
  Vec3 center = target.box.center();
  Aabb scene_box = scene.bounds();

  PlacementResult result;
  auto fail = [&](const char* reason) { ++result.failure_histogram[reason]; };

  while (result.attempts < cfg.max_attempts &&
         result.placements.size() < want) {
    ++result.attempts;
    uint64_t attempt_seed = rng.next_u64();

    double r = std::sqrt(rng.uniform(cfg.distance_min * cfg.distance_min,
                                     cfg.distance_max * cfg.distance_max));
    double phi = rng.uniform(0.0, 2.0 * geom::kPi);
    Vec3 pos{center.x + r * std::cos(phi), center.y + r * std::sin(phi),
             scene.floor_z};

    if (pos.x < scene_box.min.x || pos.x > scene_box.max.x ||
        pos.y < scene_box.min.y || pos.y > scene_box.max.y) {
      fail("out_of_scene");
      continue;
    }

    bool collides = false;
    for (const SceneObject& obj : scene.objects) {
      if (footprint_hits_box(pos, cfg.footprint_radius, kNominalAgentHeight,
                             obj.box)) {
        collides = true;
        break;
      }
    }
    if (collides) {
      fail("footprint_collision");
      continue;
    }

    bool crowded = false;
    for (const Placement& p : result.placements) {
      if ((p.position - pos).norm_xy() < cfg.min_separation) {
        crowded = true;
        break;
      }
    }
    if (crowded) {
      fail("too_close_to_existing");
      continue;
    }

    double yaw = geom::yaw_facing_deg(pos, center);
    uint32_t agent_index;
    try {
      agent_index = solve_pointing(pos, yaw, target, pool, attempt_seed, cfg);
    } catch (const PointingInfeasible&) {
      fail("pointing_infeasible");
      continue;
    }

    Placement placement{pos, yaw, agent_index};
    PlacedGesture g = placed_gesture(placement, pool);
    std::vector<const SceneObject*> obstacles;
    obstacles.reserve(scene.objects.size());
    for (const SceneObject& obj : scene.objects) {
      if (obj.id != target.id) obstacles.push_back(&obj);
    }
    if (!line_of_sight_clear(g.eye, target, obstacles)) {
      fail("line_of_sight_blocked");
      continue;
    }

    result.placements.push_back(placement);
  }

  if (result.placements.empty()) {
    throw PlacementInfeasible("no valid placement around object " +
                                  std::to_string(target.id) + " in scene " +
                                  scene.scene_id,
                              result.attempts, result.failure_histogram);
  }
  result.saturated = result.placements.size() < 3;
  return result;
}

} // namespace erupoint::place
