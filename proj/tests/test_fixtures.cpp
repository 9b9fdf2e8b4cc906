// Copyright (C) 2026 erupoint contributors
// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <set>

#include "erupoint/fixtures.hpp"
#include "erupoint/vtl.hpp"

using namespace erupoint;
using namespace erupoint::fixtures;
using geom::Vec3;

TEST_SUITE_BEGIN("fixtures");

TEST_CASE("room scenes have disjoint labeled boxes over a floor") {
  place::Scene scene = make_room_scene("room0", 77);
  CHECK(scene.floor_z == 0.0);
  CHECK(scene.objects.size() >= 4);
  CHECK_FALSE(scene.cloud.empty());
  for (size_t i = 0; i < scene.objects.size(); ++i) {
    const place::SceneObject& a = scene.objects[i];
    CHECK(a.box.min.z >= scene.floor_z);
    CHECK_FALSE(a.point_indices.empty());
    for (uint32_t pi : a.point_indices) {
      CHECK(a.box.contains(scene.cloud.points[pi]));
    }
    for (size_t j = i + 1; j < scene.objects.size(); ++j) {
      CHECK(geom::aabb_iou(a.box, scene.objects[j].box) == 0.0);
    }
  }
  // Determinism.
  place::Scene again = make_room_scene("room0", 77);
  CHECK(again.cloud.size() == scene.cloud.size());
  CHECK(again.objects.size() == scene.objects.size());
}

TEST_CASE("micro benchmark scenes hold k identical boxes with a valid gesture") {
  MicroSpec spec;
  spec.k_min = 2;
  spec.k_max = 5;
  spec.cluster_fraction = 0.25;
  auto samples = make_micro_benchmark(40, 11, spec);
  REQUIRE(samples.size() == 40);

  int isolated = 0;
  for (const MicroSample& ms : samples) {
    size_t k = ms.scene.objects.size();
    CHECK(k >= 2);
    CHECK(k <= 5);
    std::set<std::string> labels;
    std::set<long long> volumes;
    for (const place::SceneObject& o : ms.scene.objects) {
      labels.insert(o.label);
      volumes.insert(std::llround(o.box.volume() * 1e9));
    }
    CHECK(labels.size() == 1);  // linguistically indistinguishable
    CHECK(volumes.size() == 1); // geometrically identical too
    CHECK(ms.gt_index == static_cast<int>(ms.sample.object_id));
    REQUIRE(ms.agent.cloud.size() == 3000);

    // The realized gesture obeys the construction bound.
    auto tf = dataset::placement_transform(ms.sample.placement);
    Vec3 eye = tf.apply(ms.agent.eye);
    Vec3 tip = tf.apply(ms.agent.fingertip);
    geom::Ray ray = geom::Ray::through(eye, tip);
    const place::SceneObject& target = ms.scene.objects[ms.gt_index];
    CHECK(geom::ray_aabb_intersect(ray, target.box).has_value());
    CHECK(geom::angle_between_deg(ray.dir, target.box.center() - eye) <= 8.5);
    isolated += ms.cone_isolated;
  }
  CHECK(isolated > 10); // separated layouts dominate
}

TEST_CASE("micro benchmark rotates the target across object slots") {
  auto samples = make_micro_benchmark(30, 5);
  std::set<int> targets;
  for (const MicroSample& ms : samples) targets.insert(ms.gt_index);
  CHECK(targets.size() > 1);
  CHECK(targets.count(0) == 1);
}

TEST_CASE("micro_pool backs sample agent indices") {
  auto samples = make_micro_benchmark(6, 3);
  body::AgentPool pool = micro_pool(samples);
  REQUIRE(pool.size() == 6);
  for (size_t i = 0; i < samples.size(); ++i) {
    CHECK(samples[i].sample.agent_index == i);
    CHECK((pool.record(i).eye - samples[i].agent.eye).norm() < 1e-12);
  }
}

TEST_SUITE_END();
