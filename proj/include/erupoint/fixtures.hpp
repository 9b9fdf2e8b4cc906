// Copyright (C) 2026 erupoint contributors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

#include "erupoint/body.hpp"
#include "erupoint/dataset.hpp"
#include "erupoint/place.hpp"

namespace erupoint::fixtures {

// Procedural desk-scale rooms: a floor sheet plus labeled furniture boxes
// with surface point samples. Boxes never overlap each other.
struct RoomSpec {
  double width = 8.0;
  double depth = 8.0;
  int n_objects = 8;
  double floor_point_spacing = 0.15; // m
  double box_points_per_m2 = 220.0;
};

place::Scene make_room_scene(const std::string& scene_id, uint64_t seed,
                             const RoomSpec& spec = {});

// Controlled grounding scenes: one agent at the origin pointing at one of k
// identically labeled boxes arranged around it. Language cannot separate the
// candidates; the gesture can.
struct MicroSpec {
  int k_min = 2;
  int k_max = 4;
  double dist_min = 2.0;
  double dist_max = 3.0;
  double bearing_jitter_deg = 10.0;
  // Fraction of scenes where one distractor sits on the target's bearing,
  // farther out, making the gesture genuinely ambiguous.
  double cluster_fraction = 0.0;
  double box_side = 0.5;
  // Canonical layouts: no base rotation or jitter, one shared distance, so
  // box positions repeat per k and the agent pose is the only cue that
  // separates targets. Used by the learning-signal benchmark.
  bool canonical = false;
  // Distinct labels per scene: descriptions then identify the target, which
  // the fusion model can learn; identical labels leave only the gesture.
  bool distinct_labels = false;
  body::PoseConfig pose;
};

struct MicroSample {
  place::Scene scene;
  dataset::EruSample sample; // placement at the origin with solved yaw
  body::PosedAgent agent;    // agent-local frame; place via sample.placement
  int gt_index = 0;          // index of the target in scene.objects
  bool cone_isolated = false; // target is the only object within 15 deg of ray
};

std::vector<MicroSample> make_micro_benchmark(int n, uint64_t seed,
                                              const MicroSpec& spec = {});

// Ad-hoc pool over the benchmark's agents; agent i backs sample i.
body::AgentPool micro_pool(const std::vector<MicroSample>& samples);

} // namespace erupoint::fixtures
