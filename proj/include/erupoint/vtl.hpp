// Copyright (C) 2026 erupoint contributors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <utility>
#include <vector>

#include "erupoint/body.hpp"
#include "erupoint/geom.hpp"

namespace erupoint::place {
struct SceneObject;
}

namespace erupoint::vtl {

using geom::Aabb;
using geom::Ray;
using geom::Vec3;

// The pointing direction: the line from the eye through the fingertip.
struct GestureRay {
  Ray ray;
};

// Throws InvalidArgument when eye and fingertip coincide.
GestureRay gesture_ray(const Vec3& eye, const Vec3& fingertip);
GestureRay gesture_ray(const body::PosedAgent& agent);

constexpr double kAngularCutoffDeg = 30.0;

// Angular closeness of the box center to the ray, with a bonus when the ray
// actually passes through the box:
//   base  = max(0, 1 - theta / 30deg)
//   score = clamp(base + 0.5 * hit, 0, 1)
// A center behind the ray origin scores 0.
double vtl_score(const GestureRay& g, const Aabb& box);

// Descending score, ties by ascending object id. Deterministic total order.
std::vector<std::pair<int, double>> rank_objects(
    const GestureRay& g, const std::vector<place::SceneObject>& objects);

} // namespace erupoint::vtl
