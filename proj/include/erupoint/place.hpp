// Copyright (C) 2026 erupoint contributors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "erupoint/body.hpp"
#include "erupoint/geom.hpp"

namespace erupoint::place {

using geom::Aabb;
using geom::PointCloud;
using geom::Vec3;

struct SceneObject {
  int id = 0;
  std::string label;
  Aabb box;
  std::vector<uint32_t> point_indices; // into the scene cloud
};

struct Scene {
  std::string scene_id;
  PointCloud cloud;
  std::vector<SceneObject> objects;
  double floor_z = 0.0;

  Aabb bounds() const;
  const SceneObject* find_object(int id) const;
  const SceneObject& object_or_throw(int id) const;
};

// Where an agent stands: pelvis ground projection (z = floor), facing yaw.
struct Placement {
  Vec3 position;
  double yaw_deg = 0.0;
  uint32_t agent_index = 0;
};

struct PlacementConfig {
  double distance_min = 1.0;      // m, horizontal band around the target
  double distance_max = 4.0;
  double footprint_radius = 0.3;  // m, standing clearance cylinder
  double min_separation = 0.5;    // m, between placements of one target
  double fluctuation_deg = 5.0;   // arm fluctuation around the solved aim
  double max_ray_angle_deg = 8.5; // fluctuation + perturbation + quantization
  int max_attempts = 2000;
  int max_pointing_retries = 50;
};

struct PlacementResult {
  std::vector<Placement> placements;
  bool saturated = false; // fewer than 3 found before the attempt budget
  int attempts = 0;
  std::map<std::string, int> failure_histogram;
};

class PlacementInfeasible : public std::runtime_error {
public:
  PlacementInfeasible(const std::string& what, int attempts,
                      std::map<std::string, int> failures)
      : std::runtime_error(what), attempts_(attempts),
        failures_(std::move(failures)) {}
  int attempts() const { return attempts_; }
  const std::map<std::string, int>& failures() const { return failures_; }

private:
  int attempts_;
  std::map<std::string, int> failures_;
};

class PointingInfeasible : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// True iff no obstacle box blocks the segment from the eye to its first
// intersection with the target box. The target must not be in `obstacles`.
bool line_of_sight_clear(const Vec3& eye, const SceneObject& target,
                         const std::vector<const SceneObject*>& obstacles);

// Picks a pool agent (uniform profile, arm on the target's side, elevation
// solved so the zero-perturbation eye-fingertip ray would cross the target
// center, then fluctuated by U[-5, 5] degrees and snapped to the grid).
// Draws are retried until the realized gesture ray hits the target box and
// stays within the construction bound; throws PointingInfeasible otherwise.
// `position` is the candidate standing point (z = floor).
uint32_t solve_pointing(const Vec3& position, double yaw_deg,
                        const SceneObject& target, const body::AgentPool& pool,
                        uint64_t seed, const PlacementConfig& cfg = {});

// 3-5 validated placements around the target, or fewer with `saturated` set
// when the attempt budget runs out; throws PlacementInfeasible when none fit.
PlacementResult sample_placements(const Scene& scene, const SceneObject& target,
                                  const body::AgentPool& pool, uint64_t seed,
                                  const PlacementConfig& cfg = {});

// Independent re-verification of emitted placements (separate code path:
// sampling-based occlusion and ray checks instead of slab intervals).
struct VerifyReport {
  bool ok = true;
  std::vector<std::string> violations;
};
VerifyReport verify_placements(const Scene& scene, const SceneObject& target,
                               const std::vector<Placement>& placements,
                               const body::AgentPool& pool,
                               const PlacementConfig& cfg = {});

// Realized gesture landmarks of a placed pool agent, in scene coordinates.
struct PlacedGesture {
  Vec3 eye;
  Vec3 fingertip;
};
PlacedGesture placed_gesture(const Placement& placement,
                             const body::AgentPool& pool);

} // namespace erupoint::place
