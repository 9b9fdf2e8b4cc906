// Copyright (C) 2026 erupoint contributors
// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include "erupoint/error.hpp"
#include "erupoint/place.hpp"
#include "erupoint/rng.hpp"
#include "erupoint/vtl.hpp"

using namespace erupoint;
using namespace erupoint::vtl;
using geom::Aabb;
using geom::RigidTransform;
using geom::Vec3;

namespace {

Aabb cube_at(const Vec3& c, double half) {
  return {{c.x - half, c.y - half, c.z - half},
          {c.x + half, c.y + half, c.z + half}};
}

} // namespace

TEST_SUITE_BEGIN("vtl");

TEST_CASE("gesture ray direction") {
  GestureRay g = gesture_ray({0, 0, 1.6}, {0, 1, 1.6});
  CHECK((g.ray.dir - Vec3{0, 1, 0}).norm() < 1e-12);
  CHECK_THROWS_AS(gesture_ray({1, 1, 1}, {1, 1, 1}), InvalidArgument);
}

TEST_CASE("gesture ray is invariant to scaling landmarks about the eye") {
  Vec3 eye{0.2, -0.4, 1.5}, tip{0.8, 0.5, 1.2};
  GestureRay a = gesture_ray(eye, tip);
  GestureRay b = gesture_ray(eye, eye + (tip - eye) * 3.7);
  CHECK((a.ray.dir - b.ray.dir).norm() < 1e-12);
}

TEST_CASE("vtl_score formula") {
  GestureRay g = gesture_ray({0, 0, 0}, {0, 1, 0});
  CHECK(vtl_score(g, cube_at({0, 3, 0}, 0.5)) == 1.0); // on-ray, hit
  CHECK(vtl_score(g, cube_at({3, 0, 0}, 0.5)) == 0.0); // 90 degrees off
  CHECK(vtl_score(g, cube_at({0, -3, 0}, 0.5)) == 0.0); // behind
  // 15 degrees off, no intersection: base only.
  double rad = geom::deg_to_rad(15.0);
  Aabb off = cube_at({3.0 * std::sin(rad), 3.0 * std::cos(rad), 0}, 0.05);
  CHECK(vtl_score(g, off) == doctest::Approx(0.5).epsilon(1e-9));
}

TEST_CASE("vtl_score is invariant under joint rigid motion") {
  // Rigid motions that keep boxes axis-aligned: quarter-turn z-rotations
  // composed with arbitrary translations.
  Rng rng(31);
  GestureRay g = gesture_ray({0.1, 0.2, 1.4}, {0.5, 1.0, 1.3});
  for (int i = 0; i < 100; ++i) {
    Aabb box = cube_at(
        {rng.uniform(-2, 2), rng.uniform(-2, 2), rng.uniform(-2, 2)},
        rng.uniform(0.1, 0.6));
    double before = vtl_score(g, box);

    RigidTransform tf =
        RigidTransform::rot_z(90.0 * rng.uniform_u32(4));
    tf.t = {rng.uniform(-3, 3), rng.uniform(-3, 3), rng.uniform(-3, 3)};
    GestureRay moved_ray = gesture_ray(
        tf.apply(g.ray.origin), tf.apply(g.ray.origin + g.ray.dir));
    Vec3 a = tf.apply(box.min), b = tf.apply(box.max);
    Aabb moved{{std::min(a.x, b.x), std::min(a.y, b.y), std::min(a.z, b.z)},
               {std::max(a.x, b.x), std::max(a.y, b.y), std::max(a.z, b.z)}};
    CHECK(vtl_score(moved_ray, moved) ==
          doctest::Approx(before).epsilon(1e-6));
  }
}

TEST_CASE("base score decays monotonically with angle") {
  GestureRay g = gesture_ray({0, 0, 0}, {0, 1, 0});
  double last = 2.0;
  for (double deg : {0.0, 5.0, 10.0, 20.0, 29.0, 40.0, 80.0}) {
    double rad = geom::deg_to_rad(deg);
    Aabb box = cube_at({3.0 * std::sin(rad), 3.0 * std::cos(rad), 0}, 0.02);
    double s = vtl_score(g, box);
    CHECK(s <= last + 1e-12);
    last = s;
  }
}

TEST_CASE("rank_objects orders by score with id tie-break") {
  GestureRay g = gesture_ray({0, 0, 1}, {0, 1, 1});
  std::vector<place::SceneObject> objs(3);
  objs[0].id = 7;
  objs[0].box = cube_at({2.0, 2.8, 1}, 0.3); // off to the side
  objs[1].id = 3;
  objs[1].box = cube_at({0, 3, 1}, 0.3); // on the ray
  objs[2].id = 1;
  objs[2].box = cube_at({2.0, 2.8, 1}, 0.3); // duplicate of id 7

  auto ranked = rank_objects(g, objs);
  REQUIRE(ranked.size() == 3);
  CHECK(ranked[0].first == 3);
  CHECK(ranked[0].second == 1.0);
  CHECK(ranked[1].first == 1); // tie resolved by ascending id
  CHECK(ranked[2].first == 7);
  CHECK(ranked[1].second == ranked[2].second);

  CHECK_THROWS_AS(rank_objects(g, {}), InvalidArgument);
}

TEST_CASE("single object ranks first") {
  GestureRay g = gesture_ray({0, 0, 1}, {1, 1, 1});
  std::vector<place::SceneObject> objs(1);
  objs[0].id = 4;
  objs[0].box = cube_at({4, 4, 1}, 0.5);
  auto ranked = rank_objects(g, objs);
  CHECK(ranked[0].first == 4);
}

TEST_SUITE_END();
