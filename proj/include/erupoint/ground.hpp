// Copyright (C) 2026 erupoint contributors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

#include "erupoint/dataset.hpp"
#include "erupoint/place.hpp"
#include "erupoint/vtl.hpp"

namespace erupoint::ground {

enum class Mode { GestureOnly, LangOnly, Full };

const char* mode_name(Mode m);
Mode mode_from_name(const std::string& name);

struct GroundingPrediction {
  int object_id = 0;
  geom::Aabb box;
  double confidence = 0.0;
  Mode mode = Mode::Full;
};

// Argmax of the virtual-touch-line ranking; confidence is the winning score
// normalized by the score mass over all candidates.
GroundingPrediction ground_gesture_only(const place::Scene& scene,
                                        const vtl::GestureRay& gesture);
GroundingPrediction ground_gesture_only(const place::Scene& scene,
                                        const body::PosedAgent& agent);

// Lexical matcher: 1.0 for a label match (all label words present in the
// tokens) plus 0.25 per matched attribute category (color/shape/size),
// capped at two categories. Ties resolve to the lowest object id.
GroundingPrediction ground_lang_only(const place::Scene& scene,
                                     const std::vector<std::string>& tokens,
                                     const dataset::Lexicons& lexicons);

// Convex combination of the two normalized scores.
GroundingPrediction ground_full(const place::Scene& scene,
                                const vtl::GestureRay& gesture,
                                const std::vector<std::string>& tokens,
                                const dataset::Lexicons& lexicons,
                                double w_gesture = 0.5, double w_language = 0.5);

struct PredictionRecord {
  std::string sample_id;
  GroundingPrediction prediction;
};

// JSONL: {sample_id, object_id, box, confidence, mode}.
void write_predictions(const std::vector<PredictionRecord>& preds,
                       const std::string& path);
std::vector<PredictionRecord> read_predictions(const std::string& path);

} // namespace erupoint::ground
