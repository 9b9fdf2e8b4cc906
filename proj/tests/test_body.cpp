// Copyright (C) 2026 erupoint contributors
// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cstdio>
#include <filesystem>

#include "erupoint/body.hpp"
#include "erupoint/error.hpp"
#include "erupoint/geom.hpp"
#include "erupoint/rng.hpp"

using namespace erupoint;
using namespace erupoint::body;
using geom::Vec3;

TEST_SUITE_BEGIN("body");

TEST_CASE("profile heights average exactly 1.757 m") {
  double sum = 0.0;
  for (const ProfileSpec& p : profile_table()) sum += p.height;
  REQUIRE(profile_table().size() == 10);
  CHECK(sum / 10.0 == doctest::Approx(1.757).epsilon(1e-12));
}

TEST_CASE("build_human is deterministic and oversamples the body") {
  HumanModel a = build_human(0, 99);
  HumanModel b = build_human(0, 99);
  CHECK(a.joints == b.joints);
  size_t raw = 0;
  for (size_t i = 0; i < a.parts.size(); ++i) {
    raw += a.parts[i].local_points.size();
    REQUIRE(a.parts[i].local_points.size() ==
            b.parts[i].local_points.size());
    CHECK(a.parts[i].local_points.points[0] ==
          b.parts[i].local_points.points[0]);
  }
  CHECK(raw > 3000);
  CHECK_THROWS_AS(build_human(10, 1), InvalidArgument);
  CHECK_THROWS_AS(build_human(-1, 1), InvalidArgument);
}

TEST_CASE("every profile oversamples past the resample target") {
  for (int p = 0; p < 10; ++p) {
    HumanModel m = build_human(p, 5);
    size_t raw = 0;
    for (const BodyPart& part : m.parts) raw += part.local_points.size();
    CHECK(raw > 3000);
    m.validate();
    CHECK(m.joint("eye").z > m.joint("shoulder_L").z);
  }
}

TEST_CASE("elevation grid") {
  CHECK(elevation_at(0) == -90.0);
  CHECK(elevation_at(359) == 89.5);
  CHECK(elevation_index(-90.0) == 0);
  CHECK(elevation_index(0.0) == 180);
  CHECK_THROWS_AS(elevation_index(0.3), InvalidArgument);
  CHECK_THROWS_AS(elevation_index(90.0), InvalidArgument);
  CHECK(snap_elevation(0.26) == 0.5);
  CHECK(snap_elevation(95.0) == 89.5);
}

TEST_CASE("horizontal arm leaves the fingertip at shoulder height") {
  HumanModel m = build_human(1, 7);
  Landmarks lm = pose_landmarks(m, Pose::zero(Side::Right, 0.0));
  CHECK(std::abs(lm.fingertip.z - m.joint("shoulder_R").z) < 0.01);
  // Adduction pulls the fingertip onto the eye's vertical plane.
  CHECK(std::abs(lm.fingertip.x) < 1e-9);
}

TEST_CASE("arm inclination equals the commanded elevation") {
  HumanModel m = build_human(2, 7);
  for (double e : {-60.0, -30.0, 0.0, 14.5, 45.0, 70.0}) {
    for (Side s : {Side::Left, Side::Right}) {
      Pose pose = Pose::zero(s, e);
      PoseTransforms tf = pose_transforms(m, pose);
      const char* tip = s == Side::Right ? "fingertip_R" : "fingertip_L";
      const char* sho = s == Side::Right ? "shoulder_R" : "shoulder_L";
      Vec3 arm = tf.hand.apply(m.joint(tip)) - m.joint(sho);
      CHECK(std::abs(geom::elevation_deg_of(arm) - e) < 0.5);
    }
  }
}

TEST_CASE("pose_pointing yields exactly 3000 points with landmarks in reach") {
  HumanModel m = build_human(3, 11);
  PosedAgent agent = pose_pointing(m, Side::Left, 12.5, 77);
  REQUIRE(agent.cloud.size() == 3000);
  agent.cloud.validate();
  CHECK(agent.cloud.has_normals());
  CHECK_FALSE(agent.cloud.has_colors());
  geom::Aabb box = agent.cloud.bounds().expanded(0.05);
  CHECK(box.contains(agent.eye));
  CHECK(box.contains(agent.fingertip));
  for (const auto& [seg, deg] : agent.pose.perturb_deg) {
    (void)seg;
    CHECK(deg >= -3.0);
    CHECK(deg <= 3.0);
  }
  CHECK_THROWS_AS(pose_pointing(m, Side::Left, 12.3, 77), InvalidArgument);
}

TEST_CASE("pose_pointing perturbations stay in band over many draws") {
  HumanModel m = build_human(4, 1);
  for (int i = 0; i < 100; ++i) {
    Rng rng(Rng::mix(500, i));
    Pose p;
    p.side = Side::Right;
    p.elevation_deg = 0.0;
    for (const char* seg : {"upper_arm", "lower_arm", "hand", "head"}) {
      p.perturb_deg[seg] = rng.truncated_normal(1.5, 3.0);
      CHECK(p.perturb_deg[seg] >= -3.0);
      CHECK(p.perturb_deg[seg] <= 3.0);
    }
  }
}

TEST_CASE("vtl elevation covers down-to-up aims") {
  HumanModel m = build_human(0, 3);
  double lo = vtl_elevation_deg(m, Side::Right, -70.0);
  double mid = vtl_elevation_deg(m, Side::Right, 0.0);
  double hi = vtl_elevation_deg(m, Side::Right, 70.0);
  CHECK(lo < -60.0);
  CHECK(hi > 55.0);
  CHECK(lo < mid);
  CHECK(mid < hi);
}

TEST_CASE("ad-hoc pools index added agents") {
  HumanModel m = build_human(5, 13);
  AgentPool pool;
  uint32_t idx = pool.add(pose_pointing(m, Side::Right, 4.5, 3));
  CHECK(pool.size() == 1);
  CHECK(pool.record(idx).side == Side::Right);
  CHECK(pool.cloud(idx).size() == 3000);
  CHECK_FALSE(pool.grid_layout());
  CHECK_THROWS_AS(pool.record(5), InvalidArgument);
}

TEST_CASE("arm-down pose leaves the fingertip below the pelvis") {
  HumanModel m = build_human(0, 3);
  Landmarks lm = pose_landmarks(m, Pose::zero(Side::Right, -90.0));
  CHECK(lm.fingertip.z < m.joint("pelvis").z);
}

TEST_SUITE_END();
