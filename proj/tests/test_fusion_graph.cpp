// Copyright (C) 2026 erupoint contributors
// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cmath>

#include "erupoint/fusion/graph.hpp"
#include "erupoint/rng.hpp"

using erupoint::Rng;
using erupoint::fusion::Graph;
using erupoint::fusion::Mat;

namespace {

Mat random_mat(Rng& rng, int r, int c, double scale = 0.8) {
  Mat m(r, c);
  for (Eigen::Index i = 0; i < m.size(); ++i) {
    m.data()[i] = rng.uniform(-scale, scale);
  }
  return m;
}

// Exhaustive central-difference check of d(scalar expr)/d(params).
void fd_check(const std::function<double(const std::vector<Mat>&,
                                         std::vector<Mat>*)>& eval,
              std::vector<Mat> params, double tol = 1e-7) {
  std::vector<Mat> grads;
  for (const Mat& p : params) grads.push_back(Mat::Zero(p.rows(), p.cols()));
  eval(params, &grads);

  const double h = 1e-6;
  for (size_t t = 0; t < params.size(); ++t) {
    for (Eigen::Index i = 0; i < params[t].size(); ++i) {
      double saved = params[t].data()[i];
      params[t].data()[i] = saved + h;
      double fp = eval(params, nullptr);
      params[t].data()[i] = saved - h;
      double fm = eval(params, nullptr);
      params[t].data()[i] = saved;
      double fd = (fp - fm) / (2 * h);
      double a = grads[t].data()[i];
      double err = std::abs(a - fd) / std::max(1.0, std::abs(a) + std::abs(fd));
      INFO("param ", t, " entry ", i, " analytic ", a, " fd ", fd);
      CHECK(err < tol);
    }
  }
}

} // namespace

TEST_SUITE_BEGIN("fusion_graph");

TEST_CASE("dense chain of ops matches finite differences") {
  Rng rng(101);
  std::vector<Mat> params = {random_mat(rng, 4, 3), random_mat(rng, 3, 5),
                             random_mat(rng, 1, 5), random_mat(rng, 1, 5),
                             random_mat(rng, 1, 5)};
  auto eval = [](const std::vector<Mat>& p, std::vector<Mat>* g) {
    Graph graph;
    Graph::Id a = graph.param(&p[0], g ? &(*g)[0] : nullptr);
    Graph::Id w = graph.param(&p[1], g ? &(*g)[1] : nullptr);
    Graph::Id b = graph.param(&p[2], g ? &(*g)[2] : nullptr);
    Graph::Id gain = graph.param(&p[3], g ? &(*g)[3] : nullptr);
    Graph::Id bias = graph.param(&p[4], g ? &(*g)[4] : nullptr);

    Graph::Id x = graph.add_rowvec(graph.matmul(a, w), b);
    x = graph.tanh_act(x);
    x = graph.layer_norm_rows(x, gain, bias);
    x = graph.hadamard(graph.sigmoid(x), graph.one_minus(graph.scale(x, 0.3)));
    x = graph.softmax_rows(x);
    Graph::Id loss = graph.sum_all(graph.hadamard(x, x));
    if (g) graph.backward(loss);
    return graph.value(loss)(0, 0);
  };
  fd_check(eval, params);
}

TEST_CASE("attention-shaped graph matches finite differences") {
  Rng rng(202);
  std::vector<Mat> params = {random_mat(rng, 3, 4), random_mat(rng, 5, 4),
                             random_mat(rng, 4, 4), random_mat(rng, 4, 4),
                             random_mat(rng, 4, 4)};
  auto eval = [](const std::vector<Mat>& p, std::vector<Mat>* g) {
    Graph graph;
    Graph::Id q_in = graph.param(&p[0], g ? &(*g)[0] : nullptr);
    Graph::Id kv = graph.param(&p[1], g ? &(*g)[1] : nullptr);
    Graph::Id wq = graph.param(&p[2], g ? &(*g)[2] : nullptr);
    Graph::Id wk = graph.param(&p[3], g ? &(*g)[3] : nullptr);
    Graph::Id wv = graph.param(&p[4], g ? &(*g)[4] : nullptr);

    Graph::Id q = graph.matmul(q_in, wq);
    Graph::Id k = graph.matmul(kv, wk);
    Graph::Id v = graph.matmul(kv, wv);
    Graph::Id attn = graph.softmax_rows(graph.scale(graph.matmul_nt(q, k), 0.5));
    Graph::Id out = graph.matmul(attn, v);
    Graph::Id pooled = graph.segment_max(out, {0, 2, 3});
    Graph::Id merged = graph.concat_cols(graph.slice_rows(pooled, 0, 1),
                                         graph.slice_rows(pooled, 1, 1));
    Graph::Id rep = graph.repeat_rows(graph.transpose(graph.transpose(merged)), 3);
    Graph::Id loss = graph.cross_entropy_logits(
        graph.slice_rows(rep, 1, 1), 2);
    if (g) graph.backward(loss);
    return graph.value(loss)(0, 0);
  };
  fd_check(eval, params);
}

TEST_CASE("loss-style ops match finite differences") {
  Rng rng(303);
  std::vector<Mat> params = {random_mat(rng, 4, 6), random_mat(rng, 4, 3)};
  auto eval = [](const std::vector<Mat>& p, std::vector<Mat>* g) {
    Graph graph;
    Graph::Id logits = graph.param(&p[0], g ? &(*g)[0] : nullptr);
    Graph::Id pred = graph.param(&p[1], g ? &(*g)[1] : nullptr);
    Graph::Id ce = graph.mean_cross_entropy_rows(logits, {1, 4, 0, 3});
    Graph::Id sl = graph.smooth_l1_sum(pred, Mat::Constant(4, 3, 0.2));
    Graph::Id loss = graph.add(graph.scale(ce, 1.7), graph.scale(sl, 0.9));
    if (g) graph.backward(loss);
    return graph.value(loss)(0, 0);
  };
  fd_check(eval, params);
}

TEST_CASE("embedding scatters sparse gradients") {
  Rng rng(404);
  Mat table = random_mat(rng, 7, 3);
  Mat w = random_mat(rng, 3, 2);
  std::vector<int> rows = {2, 5, 2};

  Mat table_grad = Mat::Zero(7, 3);
  Mat w_grad = Mat::Zero(3, 2);
  Graph g;
  Graph::Id emb = g.embedding(&table, &table_grad, rows);
  Graph::Id wid = g.param(&w, &w_grad);
  Graph::Id loss = g.sum_all(g.tanh_act(g.matmul(emb, wid)));
  g.backward(loss);

  CHECK(table_grad.row(0).norm() == 0.0);
  CHECK(table_grad.row(2).norm() > 0.0);
  CHECK(table_grad.row(5).norm() > 0.0);

  const double h = 1e-6;
  for (int r : {2, 5}) {
    for (int c = 0; c < 3; ++c) {
      double saved = table(r, c);
      auto value = [&]() {
        Graph g2;
        Graph::Id e = g2.embedding(&table, nullptr, rows);
        Graph::Id wi = g2.param(&w, nullptr);
        return g2.value(g2.sum_all(g2.tanh_act(g2.matmul(e, wi))))(0, 0);
      };
      table(r, c) = saved + h;
      double fp = value();
      table(r, c) = saved - h;
      double fm = value();
      table(r, c) = saved;
      CHECK(table_grad(r, c) ==
            doctest::Approx((fp - fm) / (2 * h)).epsilon(1e-6));
    }
  }
}

TEST_CASE("softmax rows are normalized and layer norm is standardized") {
  Rng rng(505);
  Mat x = random_mat(rng, 6, 9, 2.0);
  Mat gain = Mat::Ones(1, 9), bias = Mat::Zero(1, 9);
  Graph g;
  Graph::Id sm = g.softmax_rows(g.input(x));
  Graph::Id ln = g.layer_norm_rows(g.input(x), g.input(gain), g.input(bias));
  for (int r = 0; r < 6; ++r) {
    CHECK(g.value(sm).row(r).sum() == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(g.value(sm).row(r).minCoeff() >= 0.0);
    CHECK(g.value(ln).row(r).mean() == doctest::Approx(0.0).epsilon(1e-5));
    double var = (g.value(ln).row(r).array() -
                  g.value(ln).row(r).mean())
                     .square()
                     .mean();
    CHECK(var == doctest::Approx(1.0).epsilon(1e-3));
  }
}

TEST_SUITE_END();
