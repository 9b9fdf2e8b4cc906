// Copyright (C) 2026 erupoint contributors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <vector>

#include "erupoint/fusion/model.hpp"

namespace erupoint::fusion {

struct TrainConfig {
  int steps = 500;
  double learning_rate = 0.5;
  int batch_size = 0; // 0 = full batch
  double holdout_fraction = 0.2;
  uint64_t seed = 7;
};

struct EpochStats {
  int step = 0;
  double train_loss = 0.0;
  double holdout_acc_025 = 0.0;
  double holdout_acc_05 = 0.0;
};

struct TrainResult {
  std::vector<EpochStats> trace;
  double loss_first = 0.0; // full training loss before the first update
  double loss_final = 0.0; // after the last update
  double untrained_acc_025 = 0.0;
  double untrained_acc_05 = 0.0;
  double final_acc_025 = 0.0;
  double final_acc_05 = 0.0;
  size_t train_count = 0;
  size_t holdout_count = 0;
};

class TrainingDiverged : public std::runtime_error {
public:
  TrainingDiverged(const std::string& what, std::vector<EpochStats> trace)
      : std::runtime_error(what), trace_(std::move(trace)) {}
  const std::vector<EpochStats>& trace() const { return trace_; }

private:
  std::vector<EpochStats> trace_;
};

struct AccuracyPair {
  double acc_025 = 0.0;
  double acc_05 = 0.0;
};

// Argmax-confidence prediction against the ground-truth box at IoU 0.25/0.5.
AccuracyPair evaluate_examples(const std::vector<TrainingExample>& examples,
                               const ModelParams& params);

// Plain gradient descent with a fixed step size; deterministic per seed.
// Examples are split into train/holdout inside; the trace reports holdout
// accuracy once per epoch (full pass over the training set).
TrainResult train_toy(const std::vector<TrainingExample>& examples,
                      ModelParams& params, const TrainConfig& cfg);

} // namespace erupoint::fusion
