// Copyright (C) 2026 erupoint contributors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <functional>
#include <vector>

#include <Eigen/Core>

namespace erupoint::fusion {

using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic,
                          Eigen::RowMajor>;

// Reverse-mode tape over small dense matrices. A graph is built per forward
// pass; backward() accumulates parameter gradients into the external
// accumulators bound by param()/embedding().
class Graph {
public:
  using Id = int32_t;

  Id input(Mat v);
  // Parameter leaf; backward adds into *grad (same shape as *value).
  Id param(const Mat* value, Mat* grad);
  // Row lookup into an external table with sparse gradient scatter.
  Id embedding(const Mat* table, Mat* grad, std::vector<int> rows);

  Id matmul(Id a, Id b);    // A B
  Id matmul_nt(Id a, Id b); // A Bᵀ
  Id add(Id a, Id b);
  Id sub(Id a, Id b);
  Id scale(Id a, double c);
  Id hadamard(Id a, Id b);
  Id one_minus(Id a);
  Id add_rowvec(Id a, Id bias); // bias 1xC broadcast over rows
  Id sigmoid(Id a);
  Id tanh_act(Id a);
  Id softmax_rows(Id a);
  Id layer_norm_rows(Id a, Id gain, Id bias); // eps 1e-5
  Id concat_cols(Id a, Id b);
  Id concat_rows(const std::vector<Id>& parts);
  Id slice_rows(Id a, int begin, int count);
  Id repeat_rows(Id a, int n);
  Id transpose(Id a);
  // Column-wise max over row segments given by offsets (size S+1);
  // an empty segment yields a zero row and routes no gradient.
  Id segment_max(Id a, std::vector<int> offsets);

  // Scalar (1x1) results.
  Id cross_entropy_logits(Id logits_1xn, int target);
  Id mean_cross_entropy_rows(Id logits, std::vector<int> targets);
  Id smooth_l1_sum(Id pred, Mat target); // beta = 1, summed over entries
  Id sum_all(Id a);

  const Mat& value(Id id) const { return nodes_[id].ext ? *nodes_[id].ext : nodes_[id].own; }
  void backward(Id root); // root must be 1x1; may be called once per graph
  size_t size() const { return nodes_.size(); }

private:
  struct Node {
    Mat own;
    const Mat* ext = nullptr;
    Mat grad;
    bool grad_live = false;
    std::function<void(Graph&, Node&)> back;
  };

  Id emit(Mat v, std::function<void(Graph&, Node&)> back);
  Mat& grad_of(Id id);

  std::vector<Node> nodes_;
};

} // namespace erupoint::fusion
