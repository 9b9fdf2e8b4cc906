// Copyright (C) 2026 erupoint contributors
// SPDX-License-Identifier: Apache-2.0
//
// Re-validation of emitted placements, kept deliberately independent of the
// sampler: occlusion and ray-hit checks march sample points instead of using
// slab intervals, and the clearance test is written from scratch.
#include <cmath>
#include <sstream>

#include "erupoint/place.hpp"

namespace erupoint::place {

namespace {

constexpr int kMarchSteps = 10000;

bool inside(const Aabb& b, const Vec3& p) {
  return p.x >= b.min.x && p.x <= b.max.x && p.y >= b.min.y && p.y <= b.max.y &&
         p.z >= b.min.z && p.z <= b.max.z;
}

// First march index at which the segment start->end enters the box, or -1.
int march_entry(const Vec3& start, const Vec3& end, const Aabb& box) {
  for (int i = 0; i <= kMarchSteps; ++i) {
    double t = static_cast<double>(i) / kMarchSteps;
    if (inside(box, start + (end - start) * t)) return i;
  }
  return -1;
}

bool ray_reaches_box(const Vec3& origin, const Vec3& dir, const Aabb& box,
                     double reach) {
  for (int i = 0; i <= kMarchSteps; ++i) {
    double t = reach * static_cast<double>(i) / kMarchSteps;
    if (inside(box, origin + dir * t)) return true;
  }
  return false;
}

bool disc_overlaps_box_xy(const Vec3& c, double radius, const Aabb& box) {
  double nx = c.x < box.min.x ? box.min.x : (c.x > box.max.x ? box.max.x : c.x);
  double ny = c.y < box.min.y ? box.min.y : (c.y > box.max.y ? box.max.y : c.y);
  double dx = c.x - nx, dy = c.y - ny;
  return std::sqrt(dx * dx + dy * dy) <= radius;
}

} // namespace

VerifyReport verify_placements(const Scene& scene, const SceneObject& target,
                               const std::vector<Placement>& placements,
                               const body::AgentPool& pool,
                               const PlacementConfig& cfg) {
  VerifyReport report;
  auto violation = [&](size_t i, const std::string& what) {
    std::ostringstream os;
    os << "placement " << i << " of object " << target.id << " in "
       << scene.scene_id << ": " << what;
    report.violations.push_back(os.str());
    report.ok = false;
  };

  Vec3 center = target.box.center();
  for (size_t i = 0; i < placements.size(); ++i) {
    const Placement& p = placements[i];

    double d = (p.position - center).norm_xy();
    if (d < cfg.distance_min - 1e-9 || d > cfg.distance_max + 1e-9) {
      violation(i, "distance band violated");
    }

    for (const SceneObject& obj : scene.objects) {
      bool z_overlap = obj.box.max.z >= p.position.z &&
                       obj.box.min.z <= p.position.z + 2.0;
      if (z_overlap &&
          disc_overlaps_box_xy(p.position, cfg.footprint_radius, obj.box)) {
        violation(i, "footprint intersects object " + std::to_string(obj.id));
      }
    }

    for (size_t j = 0; j < i; ++j) {
      if ((p.position - placements[j].position).norm_xy() <
          cfg.min_separation - 1e-9) {
        violation(i, "placements closer than the separation minimum");
      }
    }

    PlacedGesture g = placed_gesture(p, pool);

    // Line of sight: march the eye->center segment; nothing but the target
    // may be entered before the target is.
    int target_entry = march_entry(g.eye, center, target.box);
    if (target_entry < 0) {
      violation(i, "eye-center segment never enters the target box");
    } else {
      for (const SceneObject& obj : scene.objects) {
        if (obj.id == target.id) continue;
        int entry = march_entry(g.eye, center, obj.box);
        if (entry >= 0 && entry < target_entry) {
          violation(i, "line of sight crosses object " + std::to_string(obj.id));
        }
      }
    }

    Vec3 dir = (g.fingertip - g.eye);
    double n = dir.norm();
    if (n < 1e-12) {
      violation(i, "degenerate gesture ray");
      continue;
    }
    dir = dir / n;
    double reach = (center - g.eye).norm() +
                   (target.box.max - target.box.min).norm() + 1.0;
    if (!ray_reaches_box(g.eye, dir, target.box, reach)) {
      violation(i, "gesture ray misses the target box");
    }
    double angle = geom::angle_between_deg(dir, center - g.eye);
    if (angle > cfg.max_ray_angle_deg + 1e-6) {
      std::ostringstream os;
      os << "gesture ray " << angle << " deg off the eye-center line";
      violation(i, os.str());
    }
  }
  return report;
}

} // namespace erupoint::place
