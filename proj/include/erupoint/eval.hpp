// Copyright (C) 2026 erupoint contributors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

#include "erupoint/dataset.hpp"
#include "erupoint/ground.hpp"
#include "erupoint/place.hpp"

namespace erupoint::eval {

enum class SubsetClass { Unique, Multiple };

// Unique iff exactly one scene object carries the target's semantic label
// (labels compared case-insensitively).
SubsetClass classify_sample(const place::Scene& scene,
                            const place::SceneObject& target);

struct SubsetScores {
  size_t count = 0;
  double acc_at_025 = 0.0;
  double acc_at_05 = 0.0;
};

struct EvalReport {
  SubsetScores unique;
  SubsetScores multiple;
  SubsetScores overall;
  size_t missing_predictions = 0;

  std::string to_json() const;
};

// Acc@kIoU at the inclusive thresholds 0.25 and 0.5, split by subset.
// Samples without a prediction count as incorrect; duplicated sample ids in
// the predictions are a validation error.
EvalReport evaluate(const std::vector<ground::PredictionRecord>& predictions,
                    const std::vector<dataset::EruSample>& samples,
                    const std::vector<place::Scene>& scenes);

} // namespace erupoint::eval
