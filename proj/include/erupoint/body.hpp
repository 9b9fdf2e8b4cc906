// Copyright (C) 2026 erupoint contributors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "erupoint/geom.hpp"

namespace erupoint::body {

using geom::Aabb;
using geom::PointCloud;
using geom::RigidTransform;
using geom::Vec3;

enum class Side : uint8_t { Left = 0, Right = 1 };

inline const char* side_name(Side s) { return s == Side::Left ? "left" : "right"; }

// Agent-local frame: origin at the pelvis ground projection, +Y forward,
// +X the agent's right, z-up. Heights in meters.
struct BodyPart {
  std::string joint_a;
  std::string joint_b;
  double radius = 0.0;
  PointCloud local_points; // sampled on the capsule surface, with normals
};

struct HumanModel {
  int profile_id = 0;
  std::string profile_name;
  double height = 0.0;
  std::map<std::string, Vec3> joints; // rest positions
  std::vector<BodyPart> parts;

  const Vec3& joint(const std::string& name) const;
  // Enforces the structural invariants (eye above shoulders, connected
  // acyclic joint tree, non-empty part point sets).
  void validate() const;
};

struct ProfileSpec {
  const char* name;
  double height;
  double girth; // radius scale relative to the shared proportion table
};

// The ten profiles; heights average exactly 1.757 m.
const std::vector<ProfileSpec>& profile_table();

struct Pose {
  Side side = Side::Right;
  double elevation_deg = 0.0;
  // Segment perturbations in degrees, clipped to [-3, 3]:
  // upper_arm, lower_arm, hand, head.
  std::map<std::string, double> perturb_deg;

  static Pose zero(Side side, double elevation_deg);
};

struct PosedAgent {
  PointCloud cloud; // exactly agent_points points, normals only
  Vec3 eye;
  Vec3 fingertip;
  Pose pose;
  int profile_id = 0;
};

struct PoseConfig {
  double voxel_size = 0.0025; // m
  int agent_points = 3000;
  double perturb_sigma_deg = 1.5;
  double perturb_clip_deg = 3.0;
  double surface_density = 4000.0; // points per m^2 of capsule surface
};

// Elevation grid: -90 + 0.5k for k in [0, 359].
constexpr int kElevationSteps = 360;
constexpr double kElevationStepDeg = 0.5;
double elevation_at(int k);
int elevation_index(double elevation_deg); // throws InvalidArgument off-grid
double snap_elevation(double raw_deg);     // nearest grid value, clamped

HumanModel build_human(int profile_id, uint64_t seed,
                       const PoseConfig& cfg = {});

// Cumulative transforms of the posed segments; parts not listed stay at rest.
struct PoseTransforms {
  RigidTransform upper_arm;
  RigidTransform lower_arm;
  RigidTransform hand;
  RigidTransform head;
};
PoseTransforms pose_transforms(const HumanModel& model, const Pose& pose);

struct Landmarks {
  Vec3 eye;
  Vec3 fingertip;
};
// Landmarks only; no cloud sampling. Cheap enough for search loops.
Landmarks pose_landmarks(const HumanModel& model, const Pose& pose);

// Vertical angle (degrees) of the zero-perturbation eye->fingertip line at a
// given arm elevation.
double vtl_elevation_deg(const HumanModel& model, Side side,
                         double elevation_deg);

PosedAgent apply_pose(const HumanModel& model, const Pose& pose, uint64_t seed,
                      const PoseConfig& cfg = {});
PosedAgent pose_pointing(const HumanModel& model, Side side,
                         double elevation_deg, uint64_t seed,
                         const PoseConfig& cfg = {});

struct AgentRecord {
  uint8_t profile = 0;
  Side side = Side::Right;
  double elevation_deg = 0.0;
  Vec3 eye;
  Vec3 fingertip;
};

// The posed-agent pool. Grid pools are indexed profile*720 + side*360 +
// elevation_index. Clouds may stay file-backed; records are always resident.
class AgentPool {
public:
  AgentPool() = default;

  static AgentPool generate(const std::vector<HumanModel>& models,
                            uint64_t seed, const PoseConfig& cfg = {},
                            int threads = 1);
  // Streams agents to disk in fixed-size chunks instead of materializing
  // the whole pool.
  static void generate_file(const std::vector<HumanModel>& models,
                            uint64_t seed, const std::string& path,
                            const PoseConfig& cfg = {}, int threads = 1);
  static AgentPool load(const std::string& path, bool lazy = true);
  void save(const std::string& path) const;

  uint32_t add(const PosedAgent& agent); // ad-hoc (non-grid) pools

  size_t size() const { return records_.size(); }
  bool empty() const { return records_.empty(); }
  const AgentRecord& record(size_t i) const;
  PointCloud cloud(size_t i) const;

  bool grid_layout() const { return grid_; }
  uint32_t grid_index(int profile, Side side, double elevation_deg) const;

private:
  std::vector<AgentRecord> records_;
  std::vector<PointCloud> clouds_;   // resident mode
  std::string path_;                 // lazy mode
  std::vector<uint64_t> offsets_;    // lazy mode, per-agent cloud offsets
  bool grid_ = false;
};

} // namespace erupoint::body
