// Copyright (C) 2026 erupoint contributors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "erupoint/body.hpp"
#include "erupoint/geom.hpp"
#include "erupoint/place.hpp"

namespace erupoint::dataset {

using geom::PointCloud;

// Lowercased alphanumeric runs; everything else separates tokens.
std::vector<std::string> tokenize(const std::string& text);

// One dataset record: scene + referred object + description + posed agent.
struct EruSample {
  std::string sample_id;
  std::string scene_id;
  int object_id = 0;
  std::string description;
  std::vector<std::string> tokens; // always tokenize(description)
  uint32_t agent_index = 0;
  place::Placement placement;

  static EruSample make(std::string sample_id, std::string scene_id,
                        int object_id, std::string description,
                        const place::Placement& placement);
};

// Word lists behind the description statistics and the lexical grounder.
struct Lexicons {
  std::set<std::string> spatial;
  std::set<std::string> color;
  std::set<std::string> shape;
  std::set<std::string> size;

  static const Lexicons& builtin();
  // Reads spatial.txt / color.txt / shape.txt / size.txt (one word per line).
  static Lexicons load_dir(const std::string& dir);
  void save_dir(const std::string& dir) const;
};

// Scene cloud followed by the placed agent cloud; the boundary index is the
// per-point source tag.
struct ComposedCloud {
  PointCloud cloud;
  size_t scene_points = 0;

  bool from_agent(size_t i) const { return i >= scene_points; }
  PointCloud scene_only() const;
  PointCloud agent_only() const;
};

ComposedCloud compose_scene(const place::Scene& scene, const EruSample& sample,
                            const body::AgentPool& pool);

// The agent-placing rigid motion used by compose_scene.
geom::RigidTransform placement_transform(const place::Placement& placement);

// JSONL, one sample per line; read(write(x)) == x.
void write_samples(const std::vector<EruSample>& samples,
                   const std::string& path);
std::vector<EruSample> read_samples(const std::string& path);

struct SplitSpec {
  double train_fraction = 0.0;
  std::map<std::string, std::string> assignment; // scene_id -> train|val
};

// Scene-level split: shuffled scenes assigned to train until the cumulative
// sample count first reaches the fraction. No scene straddles the split.
SplitSpec split_samples(const std::vector<EruSample>& samples,
                        double train_fraction, uint64_t seed);

struct DescriptionStats {
  double pct_spatial = 0.0;
  double pct_color = 0.0;
  double pct_shape = 0.0;
  double pct_size = 0.0;
  size_t n_descriptions = 0;
};

// A description counts for a category iff any token is in its lexicon.
DescriptionStats describe_stats(const std::vector<EruSample>& samples,
                                const Lexicons& lexicons);

// Scene directory layout: <scene_id>.json (scene_id, floor_z, objects with
// id/label/box) next to <scene_id>.ply. Object point indices are derived
// from box membership on load.
place::Scene load_scene(const std::string& json_path);
std::vector<place::Scene> load_scene_dir(const std::string& dir);
void save_scene(const place::Scene& scene, const std::string& dir);

} // namespace erupoint::dataset
