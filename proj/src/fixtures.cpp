// Copyright (C) 2026 erupoint contributors
// SPDX-License-Identifier: Apache-2.0
#include "erupoint/fixtures.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "erupoint/error.hpp"
#include "erupoint/rng.hpp"
#include "erupoint/vtl.hpp"

namespace erupoint::fixtures {

using geom::Aabb;
using geom::PointCloud;
using geom::Vec3;

namespace {

struct LabelSpec {
  const char* label;
  Vec3 size; // nominal w/d/h
};

const LabelSpec kFurniture[] = {
    {"chair", {0.5, 0.5, 0.9}},   {"table", {1.4, 0.8, 0.75}},
    {"sofa", {1.8, 0.9, 0.8}},    {"cabinet", {0.8, 0.5, 1.6}},
    {"plant", {0.4, 0.4, 1.1}},   {"lamp", {0.35, 0.35, 1.5}},
    {"shelf", {0.9, 0.35, 1.8}},  {"bin", {0.35, 0.35, 0.5}},
    {"monitor", {0.6, 0.2, 0.45}}, {"box", {0.5, 0.5, 0.5}},
};

Vec3 label_color(const std::string& label) {
  uint64_t h = Rng::mix(0x1ab5u, std::hash<std::string>{}(label));
  Rng rng(h);
  return {0.15 + 0.7 * rng.uniform(), 0.15 + 0.7 * rng.uniform(),
          0.15 + 0.7 * rng.uniform()};
}

// Uniform samples over the five visible faces (no bottom), outward normals.
void sample_box_surface(const Aabb& box, const Vec3& color, double density,
                        Rng& rng, PointCloud& cloud,
                        std::vector<uint32_t>* indices) {
  Vec3 s = box.size();
  struct Face {
    Vec3 origin, du, dv, normal;
    double area;
  };
  Face faces[] = {
      {{box.min.x, box.min.y, box.max.z}, {s.x, 0, 0}, {0, s.y, 0}, {0, 0, 1},
       s.x * s.y},
      {{box.min.x, box.min.y, box.min.z}, {s.x, 0, 0}, {0, 0, s.z}, {0, -1, 0},
       s.x * s.z},
      {{box.min.x, box.max.y, box.min.z}, {s.x, 0, 0}, {0, 0, s.z}, {0, 1, 0},
       s.x * s.z},
      {{box.min.x, box.min.y, box.min.z}, {0, s.y, 0}, {0, 0, s.z}, {-1, 0, 0},
       s.y * s.z},
      {{box.max.x, box.min.y, box.min.z}, {0, s.y, 0}, {0, 0, s.z}, {1, 0, 0},
       s.y * s.z},
  };
  for (const Face& f : faces) {
    size_t n = std::max<size_t>(6, std::llround(f.area * density));
    for (size_t i = 0; i < n; ++i) {
      Vec3 p = f.origin + f.du * rng.uniform() + f.dv * rng.uniform();
      if (indices) indices->push_back(static_cast<uint32_t>(cloud.size()));
      cloud.points.push_back(p);
      cloud.colors.push_back(color);
      cloud.normals.push_back(f.normal);
    }
  }
}

void add_floor(PointCloud& cloud, double width, double depth, double spacing) {
  Vec3 gray{0.45, 0.45, 0.45};
  for (double x = -width / 2; x <= width / 2; x += spacing) {
    for (double y = -depth / 2; y <= depth / 2; y += spacing) {
      cloud.points.push_back({x, y, 0.0});
      cloud.colors.push_back(gray);
      cloud.normals.push_back({0, 0, 1});
    }
  }
}

bool boxes_overlap_xy(const Aabb& a, const Aabb& b, double margin) {
  return a.min.x - margin < b.max.x && a.max.x + margin > b.min.x &&
         a.min.y - margin < b.max.y && a.max.y + margin > b.min.y;
}

} // namespace

place::Scene make_room_scene(const std::string& scene_id, uint64_t seed,
                             const RoomSpec& spec) {
  Rng rng(seed);
  place::Scene scene;
  scene.scene_id = scene_id;
  scene.floor_z = 0.0;
  add_floor(scene.cloud, spec.width, spec.depth, spec.floor_point_spacing);

  int placed = 0;
  int guard = 0;
  while (placed < spec.n_objects && guard < spec.n_objects * 200) {
    ++guard;
    const LabelSpec& ls =
        kFurniture[rng.uniform_u32(std::size(kFurniture))];
    double scale = rng.uniform(0.85, 1.2);
    Vec3 size = ls.size * scale;
    double half_w = spec.width / 2 - size.x / 2 - 0.2;
    double half_d = spec.depth / 2 - size.y / 2 - 0.2;
    if (half_w <= 0 || half_d <= 0) continue;
    Vec3 center{rng.uniform(-half_w, half_w), rng.uniform(-half_d, half_d),
                size.z / 2};
    Aabb box{{center.x - size.x / 2, center.y - size.y / 2, 0.0},
             {center.x + size.x / 2, center.y + size.y / 2, size.z}};

    bool collides = false;
    for (const place::SceneObject& other : scene.objects) {
      if (boxes_overlap_xy(box, other.box, 0.25)) {
        collides = true;
        break;
      }
    }
    if (collides) continue;

    place::SceneObject obj;
    obj.id = placed;
    obj.label = ls.label;
    obj.box = box;
    sample_box_surface(box, label_color(obj.label), spec.box_points_per_m2,
                       rng, scene.cloud, &obj.point_indices);
    scene.objects.push_back(std::move(obj));
    ++placed;
  }
  return scene;
}

namespace {

const std::vector<body::HumanModel>& shared_models(uint64_t seed) {
  static std::vector<body::HumanModel> models;
  static uint64_t models_seed = 0;
  if (models.empty() || models_seed != seed) {
    models.clear();
    for (size_t p = 0; p < body::profile_table().size(); ++p) {
      models.push_back(body::build_human(static_cast<int>(p), seed));
    }
    models_seed = seed;
  }
  return models;
}

// Zero-perturbation eye-fingertip vertical angle over the elevation grid,
// cached per (profile, side).
const std::vector<double>& vtl_table(const body::HumanModel& model,
                                     body::Side side,
                                     std::vector<std::vector<double>>& cache) {
  size_t slot = static_cast<size_t>(model.profile_id) * 2 +
                static_cast<size_t>(side);
  if (cache.size() <= slot) cache.resize(slot + 1);
  if (cache[slot].empty()) {
    cache[slot].resize(body::kElevationSteps);
    for (int k = 0; k < body::kElevationSteps; ++k) {
      cache[slot][k] =
          body::vtl_elevation_deg(model, side, body::elevation_at(k));
    }
  }
  return cache[slot];
}

} // namespace

std::vector<MicroSample> make_micro_benchmark(int n, uint64_t seed,
                                              const MicroSpec& spec) {
  if (n <= 0) throw InvalidArgument("micro benchmark needs n > 0");
  if (spec.k_min < 2 || spec.k_max < spec.k_min) {
    throw InvalidArgument("micro benchmark needs 2 <= k_min <= k_max");
  }
  const auto& models = shared_models(Rng::mix(seed, 0xb0d7));
  std::vector<std::vector<double>> vtl_cache;

  std::vector<MicroSample> out;
  out.reserve(n);
  for (int i = 0; i < n; ++i) {
    Rng rng(Rng::mix(seed, 0x6d1c0000u + static_cast<uint32_t>(i)));
    int k = spec.k_min + static_cast<int>(rng.uniform_u32(
                             static_cast<uint32_t>(spec.k_max - spec.k_min + 1)));
    int target = i % k;
    bool cluster = rng.uniform() < spec.cluster_fraction && k >= 2;

    uint32_t first_label = rng.uniform_u32(std::size(kFurniture));
    double side_len = spec.box_side;
    double box_h = std::min(kFurniture[first_label].size.z, 1.0);

    // Bearings: evenly spread with jitter; one clustered distractor sits on
    // the target bearing, farther out.
    double base = spec.canonical ? 0.0 : rng.uniform(0.0, 360.0);
    double spacing = 360.0 / k;
    double max_jitter =
        spec.canonical
            ? 0.0
            : std::min(spec.bearing_jitter_deg,
                       std::max(0.0, spacing / 2 - 12.0));
    std::vector<double> bearings(k), dists(k);
    for (int b = 0; b < k; ++b) {
      bearings[b] = base + spacing * b + (max_jitter > 0.0
                                              ? rng.uniform(-max_jitter,
                                                            max_jitter)
                                              : 0.0);
      dists[b] = spec.canonical ? 0.5 * (spec.dist_min + spec.dist_max)
                                : rng.uniform(spec.dist_min, spec.dist_max);
    }
    if (cluster) {
      int d = (target + 1) % k;
      bearings[d] = bearings[target] + rng.uniform(-2.0, 2.0);
      dists[d] = dists[target] + rng.uniform(0.9, 1.5);
    }

    MicroSample ms;
    char buf[32];
    std::snprintf(buf, sizeof(buf), "micro%05d", i);
    ms.scene.scene_id = buf;
    ms.scene.floor_z = 0.0;
    double room = 2.0 * (spec.dist_max + 2.5);
    add_floor(ms.scene.cloud, room, room, 0.35);

    for (int b = 0; b < k; ++b) {
      double rad = geom::deg_to_rad(bearings[b]);
      Vec3 c{dists[b] * std::cos(rad), dists[b] * std::sin(rad), box_h / 2};
      place::SceneObject obj;
      obj.id = b;
      obj.label = spec.distinct_labels
                      ? kFurniture[(first_label + b) % std::size(kFurniture)]
                            .label
                      : kFurniture[first_label].label;
      obj.box = {{c.x - side_len / 2, c.y - side_len / 2, 0.0},
                 {c.x + side_len / 2, c.y + side_len / 2, box_h}};
      sample_box_surface(obj.box, label_color(obj.label), 200.0, rng,
                         ms.scene.cloud, &obj.point_indices);
      ms.scene.objects.push_back(std::move(obj));
    }
    ms.gt_index = target;
    const place::SceneObject& tgt = ms.scene.objects[target];
    Vec3 center = tgt.box.center();

    const body::HumanModel& model =
        models[rng.uniform_u32(static_cast<uint32_t>(models.size()))];
    body::Side arm = rng.coin() ? body::Side::Right : body::Side::Left;
    double yaw = geom::yaw_facing_deg({0, 0, 0}, center);
    geom::RigidTransform place_tf = geom::RigidTransform::rot_z(yaw);

    double eye_z = model.joint("eye").z;
    double want = geom::elevation_deg_of(center - Vec3{0, 0, eye_z});
    const std::vector<double>& table = vtl_table(model, arm, vtl_cache);
    int best_k = 0;
    for (int g = 1; g < body::kElevationSteps; ++g) {
      if (std::abs(table[g] - want) < std::abs(table[best_k] - want)) best_k = g;
    }

    // Fluctuate, snap, and keep only draws whose realized ray still crosses
    // the target box inside the construction bound.
    body::Pose pose;
    bool ok = false;
    for (int retry = 0; retry < 50 && !ok; ++retry) {
      double delta = rng.uniform(-5.0, 5.0);
      pose.side = arm;
      pose.elevation_deg =
          body::snap_elevation(body::elevation_at(best_k) + delta);
      for (const char* seg : {"upper_arm", "lower_arm", "hand", "head"}) {
        pose.perturb_deg[seg] = rng.truncated_normal(
            spec.pose.perturb_sigma_deg, spec.pose.perturb_clip_deg);
      }
      body::Landmarks lm = body::pose_landmarks(model, pose);
      Vec3 eye_w = place_tf.apply(lm.eye);
      Vec3 tip_w = place_tf.apply(lm.fingertip);
      geom::Ray ray = geom::Ray::through(eye_w, tip_w);
      ok = geom::ray_aabb_intersect(ray, tgt.box).has_value() &&
           geom::angle_between_deg(ray.dir, center - eye_w) <= 8.5;
    }
    if (!ok) {
      throw InvalidArgument("micro benchmark: pointing solve failed for " +
                            ms.scene.scene_id);
    }

    ms.agent = body::apply_pose(model, pose, rng.next_u64(), spec.pose);

    place::Placement placement;
    placement.position = {0, 0, 0};
    placement.yaw_deg = yaw;
    placement.agent_index = static_cast<uint32_t>(i);
    ms.sample = dataset::EruSample::make(
        std::string(buf) + "_s", ms.scene.scene_id, tgt.id,
        "the " + tgt.label, placement);

    Vec3 eye_w = place_tf.apply(ms.agent.eye);
    Vec3 tip_w = place_tf.apply(ms.agent.fingertip);
    geom::Ray ray = geom::Ray::through(eye_w, tip_w);
    int in_cone = 0;
    bool target_in_cone = false;
    for (const place::SceneObject& obj : ms.scene.objects) {
      double ang =
          geom::angle_between_deg(ray.dir, obj.box.center() - eye_w);
      if (ang <= 15.0) {
        ++in_cone;
        if (obj.id == tgt.id) target_in_cone = true;
      }
    }
    ms.cone_isolated = target_in_cone && in_cone == 1;
    out.push_back(std::move(ms));
  }
  return out;
}

body::AgentPool micro_pool(const std::vector<MicroSample>& samples) {
  body::AgentPool pool;
  for (const MicroSample& ms : samples) pool.add(ms.agent);
  return pool;
}

} // namespace erupoint::fixtures
