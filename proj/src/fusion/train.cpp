// Copyright (C) 2026 erupoint contributors
// SPDX-License-Identifier: Apache-2.0
#include "erupoint/fusion/train.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "erupoint/error.hpp"
#include "erupoint/rng.hpp"

namespace erupoint::fusion {

namespace {

double example_loss(const TrainingExample& ex, const ModelParams& params,
                    ModelParams* grads) {
  Graph g;
  ForwardNodes fwd = build_forward(g, ex, params, grads);
  LossNodes ls = build_loss(g, fwd, ex, params, grads);
  double value = g.value(ls.total)(0, 0);
  if (grads) g.backward(ls.total);
  return value;
}

double mean_loss(const std::vector<const TrainingExample*>& batch,
                 const ModelParams& params, ModelParams* grads) {
  double total = 0.0;
  for (const TrainingExample* ex : batch) {
    total += example_loss(*ex, params, grads);
  }
  return total / static_cast<double>(batch.size());
}

} // namespace

AccuracyPair evaluate_examples(const std::vector<TrainingExample>& examples,
                               const ModelParams& params) {
  AccuracyPair acc;
  if (examples.empty()) return acc;
  size_t hit_025 = 0, hit_05 = 0;
  for (const TrainingExample& ex : examples) {
    Graph g;
    ForwardNodes fwd = build_forward(g, ex, params, nullptr);
    const Mat& conf = g.value(fwd.conf);
    Eigen::Index best = 0;
    conf.row(0).maxCoeff(&best);
    double iou = geom::aabb_iou(ex.boxes[best], ex.boxes[ex.gt_index]);
    if (iou >= 0.25) ++hit_025;
    if (iou >= 0.5) ++hit_05;
  }
  acc.acc_025 = static_cast<double>(hit_025) / examples.size();
  acc.acc_05 = static_cast<double>(hit_05) / examples.size();
  return acc;
}

TrainResult train_toy(const std::vector<TrainingExample>& examples,
                      ModelParams& params, const TrainConfig& cfg) {
  if (examples.size() < 5) {
    throw InvalidArgument("train_toy: needs at least a handful of examples");
  }
  if (cfg.steps < 0 || !(cfg.learning_rate > 0.0)) {
    throw InvalidArgument("train_toy: bad steps or learning rate");
  }

  // Deterministic shuffle, then the tail becomes the holdout split.
  std::vector<size_t> order(examples.size());
  std::iota(order.begin(), order.end(), 0);
  Rng rng(Rng::mix(cfg.seed, 0x7a41u));
  for (size_t i = order.size(); i > 1; --i) {
    std::swap(order[i - 1], order[rng.uniform_u32(static_cast<uint32_t>(i))]);
  }
  size_t holdout_n = std::max<size_t>(
      1, static_cast<size_t>(examples.size() * cfg.holdout_fraction));
  holdout_n = std::min(holdout_n, examples.size() - 1);

  std::vector<const TrainingExample*> train;
  std::vector<TrainingExample> holdout;
  for (size_t i = 0; i < order.size(); ++i) {
    if (i < order.size() - holdout_n) {
      train.push_back(&examples[order[i]]);
    } else {
      holdout.push_back(examples[order[i]]);
    }
  }

  TrainResult result;
  result.train_count = train.size();
  result.holdout_count = holdout.size();

  AccuracyPair before = evaluate_examples(holdout, params);
  result.untrained_acc_025 = before.acc_025;
  result.untrained_acc_05 = before.acc_05;
  result.loss_first = mean_loss(train, params, nullptr);

  size_t batch = cfg.batch_size > 0
                     ? std::min<size_t>(cfg.batch_size, train.size())
                     : train.size();
  size_t steps_per_epoch = (train.size() + batch - 1) / batch;
  size_t cursor = 0;

  std::vector<const TrainingExample*> schedule = train;
  auto reshuffle = [&](uint64_t salt) {
    Rng r(Rng::mix(cfg.seed, salt));
    for (size_t i = schedule.size(); i > 1; --i) {
      std::swap(schedule[i - 1],
                schedule[r.uniform_u32(static_cast<uint32_t>(i))]);
    }
  };

  double last_loss = result.loss_first;
  for (int step = 1; step <= cfg.steps; ++step) {
    if (batch < train.size() && cursor == 0) {
      reshuffle(0x9000u + static_cast<uint64_t>(step));
    }
    std::vector<const TrainingExample*> mini;
    for (size_t i = 0; i < batch; ++i) {
      mini.push_back(schedule[(cursor + i) % schedule.size()]);
    }
    cursor = (cursor + batch) % schedule.size();

    ModelParams grads = params.zeros_like();
    double loss = mean_loss(mini, params, &grads);
    if (!std::isfinite(loss)) {
      throw TrainingDiverged(
          "training loss became non-finite at step " + std::to_string(step),
          result.trace);
    }
    params.add_scaled(grads, -cfg.learning_rate / mini.size());
    last_loss = loss;

    if (step % steps_per_epoch == 0 || step == cfg.steps) {
      AccuracyPair acc = evaluate_examples(holdout, params);
      result.trace.push_back({step, last_loss, acc.acc_025, acc.acc_05});
    }
  }

  result.loss_final =
      cfg.steps > 0 ? mean_loss(train, params, nullptr) : result.loss_first;
  AccuracyPair after = evaluate_examples(holdout, params);
  result.final_acc_025 = after.acc_025;
  result.final_acc_05 = after.acc_05;
  if (result.trace.empty()) {
    result.trace.push_back({0, result.loss_first, after.acc_025, after.acc_05});
  }
  return result;
}

} // namespace erupoint::fusion
