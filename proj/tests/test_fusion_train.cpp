// Copyright (C) 2026 erupoint contributors
// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include "erupoint/error.hpp"
#include "erupoint/fixtures.hpp"
#include "erupoint/fusion/train.hpp"

using namespace erupoint;
using namespace erupoint::fusion;

namespace {

FusionConfig train_cfg() {
  FusionConfig cfg;
  cfg.hidden = 16;
  cfg.embed_vocab = 512;
  cfg.embed_dim = 16;
  cfg.n_classes = 8;
  cfg.size_bins = 4;
  cfg.decoder_layers = 2;
  cfg.ffn_mult = 2;
  cfg.fps_centroids = 24;
  cfg.group_max_points = 16;
  cfg.init_seed = 11;
  return cfg;
}

std::vector<TrainingExample> micro_examples(int n, uint64_t seed,
                                            const FusionConfig& cfg) {
  fixtures::MicroSpec spec;
  spec.k_min = 2;
  spec.k_max = 3;
  auto samples = fixtures::make_micro_benchmark(n, seed, spec);
  std::vector<TrainingExample> out;
  out.reserve(samples.size());
  for (const fixtures::MicroSample& ms : samples) {
    geom::PointCloud placed = ms.agent.cloud.transformed(
        dataset::placement_transform(ms.sample.placement));
    out.push_back(make_training_example(ms.scene, ms.gt_index,
                                        ms.sample.tokens, placed, cfg));
  }
  return out;
}

} // namespace

TEST_SUITE_BEGIN("fusion_train");

TEST_CASE("training runs are deterministic per seed") {
  FusionConfig cfg = train_cfg();
  auto examples = micro_examples(24, 3, cfg);
  TrainConfig tc;
  tc.steps = 6;
  tc.learning_rate = 0.2;
  tc.batch_size = 8;
  tc.seed = 5;

  ModelParams a = ModelParams::init(cfg);
  ModelParams b = ModelParams::init(cfg);
  TrainResult ra = train_toy(examples, a, tc);
  TrainResult rb = train_toy(examples, b, tc);
  REQUIRE(ra.trace.size() == rb.trace.size());
  for (size_t i = 0; i < ra.trace.size(); ++i) {
    CHECK(ra.trace[i].train_loss == rb.trace[i].train_loss);
    CHECK(ra.trace[i].holdout_acc_025 == rb.trace[i].holdout_acc_025);
  }
  CHECK(ra.loss_final == rb.loss_final);
}

TEST_CASE("zero steps leaves the model untrained") {
  FusionConfig cfg = train_cfg();
  auto examples = micro_examples(16, 9, cfg);
  TrainConfig tc;
  tc.steps = 0;
  ModelParams params = ModelParams::init(cfg);
  TrainResult r = train_toy(examples, params, tc);
  CHECK(r.loss_first == r.loss_final);
  CHECK(r.untrained_acc_025 == r.final_acc_025);
}

TEST_CASE("a short run already reduces the training loss") {
  FusionConfig cfg = train_cfg();
  auto examples = micro_examples(30, 13, cfg);
  TrainConfig tc;
  tc.steps = 30;
  tc.learning_rate = 0.05;
  tc.batch_size = 0; // full batch
  tc.seed = 2;
  ModelParams params = ModelParams::init(cfg);
  TrainResult r = train_toy(examples, params, tc);
  CHECK(r.loss_final < r.loss_first);
  CHECK(r.train_count + r.holdout_count == examples.size());
  REQUIRE_FALSE(r.trace.empty());
}

TEST_CASE("an absurd learning rate raises TrainingDiverged") {
  FusionConfig cfg = train_cfg();
  auto examples = micro_examples(12, 21, cfg);
  TrainConfig tc;
  tc.steps = 60;
  tc.learning_rate = 1e30;
  ModelParams params = ModelParams::init(cfg);
  CHECK_THROWS_AS(train_toy(examples, params, tc), TrainingDiverged);
}

TEST_CASE("train_toy validates its inputs") {
  FusionConfig cfg = train_cfg();
  auto examples = micro_examples(6, 33, cfg);
  ModelParams params = ModelParams::init(cfg);
  TrainConfig bad;
  bad.learning_rate = 0.0;
  CHECK_THROWS_AS(train_toy(examples, params, bad), InvalidArgument);
  CHECK_THROWS_AS(train_toy({}, params, TrainConfig{}), InvalidArgument);
}

TEST_SUITE_END();
