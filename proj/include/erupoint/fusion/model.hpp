// Copyright (C) 2026 erupoint contributors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <functional>
#include <string>
#include <vector>

#include "erupoint/body.hpp"
#include "erupoint/dataset.hpp"
#include "erupoint/fusion/graph.hpp"
#include "erupoint/geom.hpp"
#include "erupoint/place.hpp"

namespace erupoint::fusion {

// Shape + row-major values; the interchange form used by the checkpoint
// format and the public encoder results.
struct Tensor {
  std::string name;
  std::vector<int> shape;
  std::vector<double> values;

  static Tensor from_mat(std::string name, const Mat& m);
  Mat to_mat() const;
};

struct FusionConfig {
  int hidden = 32;         // H
  int embed_vocab = 4096;  // V (hash-indexed)
  int embed_dim = 64;      // D
  int n_classes = 18;
  int size_bins = 8;
  int decoder_layers = 2;
  int ffn_mult = 4;
  int fps_centroids = 64;
  double group_radius = 0.2; // m
  int group_max_points = 32;
  int proposal_max_points = 256;
  int max_tokens = 126;
  uint64_t init_seed = 1;
};

struct DecoderLayerParams {
  Mat sa_wq, sa_wk, sa_wv, sa_wo; // self-attention
  Mat ln1_g, ln1_b;
  Mat ca_wq, ca_wk, ca_wv, ca_wo; // cross-attention over language
  Mat ln2_g, ln2_b;
  Mat ff_w1, ff_b1, ff_w2, ff_b2;
  Mat ln3_g, ln3_b;
};

struct ModelParams {
  FusionConfig cfg;

  Mat embed; // V x D

  // GRU gates (update z, reset r, candidate c).
  Mat gru_wz, gru_uz, gru_bz;
  Mat gru_wr, gru_ur, gru_br;
  Mat gru_wc, gru_uc, gru_bc;

  // Language self-attention.
  Mat lattn_wq, lattn_wk, lattn_wv, lattn_wo;

  // Gesture set abstraction + projection.
  Mat ges_w1, ges_b1, ges_w2, ges_b2, ges_wp, ges_bp;

  // Proposal pooling + projection.
  Mat prop_w1, prop_b1, prop_w2, prop_b2, prop_wp, prop_bp;

  // Proposal-gesture fusion block.
  Mat fuse_w, fuse_b, fuse_ln_g, fuse_ln_b;

  std::vector<DecoderLayerParams> decoder;

  Mat head_w, head_b; // per-proposal confidence logit

  // Auxiliary heads feeding the loss decomposition.
  Mat cls_w, cls_b;       // language -> object class
  Mat objn_w, objn_b;     // per-proposal objectness
  Mat sem_w, sem_b;       // per-proposal semantic class
  Mat center_w, center_b; // center offset regression
  Mat szcls_w, szcls_b;   // size-class logits
  Mat szreg_w, szreg_b;   // size residual regression

  static ModelParams init(const FusionConfig& cfg);
  ModelParams zeros_like() const;

  // Stable iteration over every named parameter tensor.
  void visit(const std::function<void(const std::string&, Mat&)>& fn);
  void visit(const std::function<void(const std::string&, const Mat&)>& fn) const;

  void add_scaled(const ModelParams& other, double scale); // this += other*s
  void scale_in_place(double s);

  // Checkpoint: magic "ERUNET1\0", named f32 tensor directory.
  void save(const std::string& path) const;
  static ModelParams load(const std::string& path);
};

// ---- Preprocessing (parameter-independent, cacheable per sample) ----

struct GesturePreproc {
  Mat grouped;              // sum(group sizes) x 6: relative xyz + normal
  std::vector<int> offsets; // fps_centroids + 1
};
GesturePreproc preprocess_gesture(const geom::PointCloud& agent_cloud,
                                  const FusionConfig& cfg);

struct ProposalPreproc {
  Mat box_points;            // pooled point rows: centered xyz + rgb
  std::vector<int> offsets;  // M + 1
  Mat box_geom;              // M x 6: scaled center + size
  std::vector<uint8_t> empty; // 1 where the box contained no points
};
ProposalPreproc preprocess_proposals(const geom::PointCloud& scene_cloud,
                                     const std::vector<geom::Aabb>& boxes,
                                     const FusionConfig& cfg);

int hash_token_id(const std::string& token, int vocab);
int hash_class_id(const std::string& label, int n_classes);
int size_bin_of(const geom::Aabb& box, int bins);

// One grounding instance ready for the network.
struct TrainingExample {
  GesturePreproc gesture;
  ProposalPreproc proposals;
  std::vector<int> token_ids;
  std::vector<geom::Aabb> boxes;
  int gt_index = 0;
  int target_class = 0;           // language->class target
  std::vector<int> sem_class;     // per proposal
  std::vector<int> size_class;    // per proposal
};

TrainingExample make_training_example(const place::Scene& scene, int gt_index,
                                      const std::vector<std::string>& tokens,
                                      const geom::PointCloud& placed_agent,
                                      const FusionConfig& cfg);
TrainingExample make_training_example(const place::Scene& scene,
                                      const dataset::EruSample& sample,
                                      const body::AgentPool& pool,
                                      const FusionConfig& cfg);

// ---- Graph builders ----

struct ForwardNodes {
  Graph::Id f_g;        // 1 x H
  Graph::Id f_l;        // L x H
  Graph::Id f_l_global; // 1 x H
  Graph::Id f_p;        // M x H
  Graph::Id dec_out;    // M x H
  Graph::Id logits;     // 1 x M
  Graph::Id conf;       // 1 x M, softmax
};

// grads may be null for inference-only graphs.
ForwardNodes build_forward(Graph& g, const TrainingExample& ex,
                           const ModelParams& params, ModelParams* grads);

struct LossNodes {
  Graph::Id total;
  Graph::Id loc, cls, objn, sem, center, szcls, szreg;
};
LossNodes build_loss(Graph& g, const ForwardNodes& fwd,
                     const TrainingExample& ex, const ModelParams& params,
                     ModelParams* grads);

// ---- Public operations ----

// Shapes (1,H); permutation-invariant in the input points.
Tensor encode_gesture(const geom::PointCloud& agent_cloud,
                      const ModelParams& params);

// F_l (L,H) and F_l_global (1,H).
std::pair<Tensor, Tensor> encode_language(const std::vector<std::string>& tokens,
                                          const ModelParams& params);

// (M,H) features for ground-truth boxes over the scene cloud.
Tensor encode_proposals(const geom::PointCloud& scene_cloud,
                        const std::vector<geom::Aabb>& boxes,
                        const ModelParams& params);

// Softmax confidences over M proposals from externally supplied features.
std::vector<double> fuse(const Tensor& f_p, const Tensor& f_g,
                         const Tensor& f_l, const ModelParams& params);

struct LossBreakdown {
  double total = 0, loc = 0, det = 0, cls = 0;
  double vote_reg = 0, objn_cls = 0, sem_cls = 0, box = 0;
  double center_reg = 0, size_cls = 0, size_reg = 0;

  // Fills the composite terms from the leaf components:
  //   box   = center_reg + 0.1 size_cls + size_reg
  //   det   = vote_reg + 0.1 objn_cls + 0.1 sem_cls + box
  //   total = 0.3 loc + 10 det + 0.1 cls
  static LossBreakdown from_components(double loc, double cls, double vote_reg,
                                       double objn_cls, double sem_cls,
                                       double center_reg, double size_cls,
                                       double size_reg);
};

struct AuxPredictions {
  Mat objn_logits;   // M x 2
  Mat sem_logits;    // M x n_classes
  Mat center_pred;   // M x 3
  Mat szcls_logits;  // M x size_bins
  Mat szreg_pred;    // M x 3
  Mat cls_logits;    // 1 x n_classes
};

struct LossTargets {
  int target_class = 0;
  std::vector<int> sem_class;
  std::vector<int> size_class;
};

// Value-level loss with the paper's weighting; vote regression is zero under
// ground-truth proposals.
LossBreakdown compute_loss(const std::vector<double>& confidences, int gt_index,
                           const AuxPredictions& aux, const LossTargets& targets);

// Forward pass producing everything compute_loss consumes.
struct ForwardResult {
  std::vector<double> confidences;
  AuxPredictions aux;
  LossBreakdown loss;
};
ForwardResult run_forward(const TrainingExample& ex, const ModelParams& params);

// Central finite differences against the analytic gradients on a sampled 1%
// of entries per parameter group (at least 20 each).
struct GradCheckResult {
  double max_rel_error = 0.0;
  std::string worst_param;
};
GradCheckResult grad_check(const ModelParams& params,
                           const std::vector<TrainingExample>& micro_batch,
                           uint64_t seed);

} // namespace erupoint::fusion
