// Copyright (C) 2026 erupoint contributors
// SPDX-License-Identifier: Apache-2.0
#include "erupoint/fusion/graph.hpp"

#include <cmath>

#include "erupoint/error.hpp"

namespace erupoint::fusion {

namespace {
constexpr double kLayerNormEps = 1e-5;
}

Graph::Id Graph::emit(Mat v, std::function<void(Graph&, Node&)> back) {
  Node node;
  node.own = std::move(v);
  node.back = std::move(back);
  nodes_.push_back(std::move(node));
  return static_cast<Id>(nodes_.size() - 1);
}

Mat& Graph::grad_of(Id id) {
  Node& n = nodes_[id];
  if (!n.grad_live) {
    const Mat& v = n.ext ? *n.ext : n.own;
    n.grad = Mat::Zero(v.rows(), v.cols());
    n.grad_live = true;
  }
  return n.grad;
}

Graph::Id Graph::input(Mat v) { return emit(std::move(v), nullptr); }

Graph::Id Graph::param(const Mat* value, Mat* grad) {
  Node node;
  node.ext = value;
  node.back = [grad](Graph&, Node& n) {
    if (grad) *grad += n.grad;
  };
  nodes_.push_back(std::move(node));
  return static_cast<Id>(nodes_.size() - 1);
}

Graph::Id Graph::embedding(const Mat* table, Mat* grad,
                           std::vector<int> rows) {
  Mat out(rows.size(), table->cols());
  for (size_t i = 0; i < rows.size(); ++i) out.row(i) = table->row(rows[i]);
  return emit(std::move(out), [grad, rows = std::move(rows)](Graph&, Node& n) {
    if (!grad) return;
    for (size_t i = 0; i < rows.size(); ++i) {
      grad->row(rows[i]) += n.grad.row(i);
    }
  });
}

Graph::Id Graph::matmul(Id a, Id b) {
  Mat out = value(a) * value(b);
  return emit(std::move(out), [a, b](Graph& g, Node& n) {
    g.grad_of(a) += n.grad * g.value(b).transpose();
    g.grad_of(b) += g.value(a).transpose() * n.grad;
  });
}

Graph::Id Graph::matmul_nt(Id a, Id b) {
  Mat out = value(a) * value(b).transpose();
  return emit(std::move(out), [a, b](Graph& g, Node& n) {
    g.grad_of(a) += n.grad * g.value(b);
    g.grad_of(b) += n.grad.transpose() * g.value(a);
  });
}

Graph::Id Graph::add(Id a, Id b) {
  Mat out = value(a) + value(b);
  return emit(std::move(out), [a, b](Graph& g, Node& n) {
    g.grad_of(a) += n.grad;
    g.grad_of(b) += n.grad;
  });
}

Graph::Id Graph::sub(Id a, Id b) {
  Mat out = value(a) - value(b);
  return emit(std::move(out), [a, b](Graph& g, Node& n) {
    g.grad_of(a) += n.grad;
    g.grad_of(b) -= n.grad;
  });
}

Graph::Id Graph::scale(Id a, double c) {
  Mat out = value(a) * c;
  return emit(std::move(out), [a, c](Graph& g, Node& n) {
    g.grad_of(a) += n.grad * c;
  });
}

Graph::Id Graph::hadamard(Id a, Id b) {
  Mat out = value(a).cwiseProduct(value(b));
  return emit(std::move(out), [a, b](Graph& g, Node& n) {
    g.grad_of(a) += n.grad.cwiseProduct(g.value(b));
    g.grad_of(b) += n.grad.cwiseProduct(g.value(a));
  });
}

Graph::Id Graph::one_minus(Id a) {
  Mat out = Mat::Ones(value(a).rows(), value(a).cols()) - value(a);
  return emit(std::move(out),
              [a](Graph& g, Node& n) { g.grad_of(a) -= n.grad; });
}

Graph::Id Graph::add_rowvec(Id a, Id bias) {
  Mat out = value(a);
  out.rowwise() += value(bias).row(0);
  return emit(std::move(out), [a, bias](Graph& g, Node& n) {
    g.grad_of(a) += n.grad;
    g.grad_of(bias) += n.grad.colwise().sum();
  });
}

Graph::Id Graph::sigmoid(Id a) {
  Mat out =
      value(a).unaryExpr([](double x) { return 1.0 / (1.0 + std::exp(-x)); });
  return emit(std::move(out), [a](Graph& g, Node& n) {
    const Mat& s = n.own;
    g.grad_of(a) +=
        n.grad.cwiseProduct(s.cwiseProduct(Mat::Ones(s.rows(), s.cols()) - s));
  });
}

Graph::Id Graph::tanh_act(Id a) {
  Mat out = value(a).unaryExpr([](double x) { return std::tanh(x); });
  return emit(std::move(out), [a](Graph& g, Node& n) {
    const Mat& t = n.own;
    g.grad_of(a) += n.grad.cwiseProduct(Mat::Ones(t.rows(), t.cols()) -
                                        t.cwiseProduct(t));
  });
}

Graph::Id Graph::softmax_rows(Id a) {
  Mat out = value(a);
  for (Eigen::Index r = 0; r < out.rows(); ++r) {
    double m = out.row(r).maxCoeff();
    out.row(r) = (out.row(r).array() - m).exp();
    out.row(r) /= out.row(r).sum();
  }
  return emit(std::move(out), [a](Graph& g, Node& n) {
    const Mat& p = n.own;
    Mat& da = g.grad_of(a);
    for (Eigen::Index r = 0; r < p.rows(); ++r) {
      double dot = n.grad.row(r).dot(p.row(r));
      da.row(r) += p.row(r).cwiseProduct((n.grad.row(r).array() - dot).matrix());
    }
  });
}

Graph::Id Graph::layer_norm_rows(Id a, Id gain, Id bias) {
  const Mat& x = value(a);
  Mat xhat(x.rows(), x.cols());
  std::vector<double> inv_sigma(x.rows());
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    double mean = x.row(r).mean();
    double var = (x.row(r).array() - mean).square().mean();
    inv_sigma[r] = 1.0 / std::sqrt(var + kLayerNormEps);
    xhat.row(r) = ((x.row(r).array() - mean) * inv_sigma[r]).matrix();
  }
  Mat out = xhat;
  out.array().rowwise() *= value(gain).row(0).array();
  out.rowwise() += value(bias).row(0);

  return emit(std::move(out),
              [a, gain, bias, xhat = std::move(xhat),
               inv_sigma = std::move(inv_sigma)](Graph& g, Node& n) {
                const Mat& gvec = g.value(gain);
                Mat dxhat = n.grad;
                dxhat.array().rowwise() *= gvec.row(0).array();
                Mat& da = g.grad_of(a);
                for (Eigen::Index r = 0; r < dxhat.rows(); ++r) {
                  double m1 = dxhat.row(r).mean();
                  double m2 = dxhat.row(r).cwiseProduct(xhat.row(r)).mean();
                  da.row(r) += (((dxhat.row(r).array() - m1) -
                                 xhat.row(r).array() * m2) *
                                inv_sigma[r])
                                   .matrix();
                }
                g.grad_of(gain) += n.grad.cwiseProduct(xhat).colwise().sum();
                g.grad_of(bias) += n.grad.colwise().sum();
              });
}

Graph::Id Graph::concat_cols(Id a, Id b) {
  const Mat& va = value(a);
  const Mat& vb = value(b);
  Mat out(va.rows(), va.cols() + vb.cols());
  out << va, vb;
  return emit(std::move(out), [a, b](Graph& g, Node& n) {
    Eigen::Index ca = g.value(a).cols();
    g.grad_of(a) += n.grad.leftCols(ca);
    g.grad_of(b) += n.grad.rightCols(n.grad.cols() - ca);
  });
}

Graph::Id Graph::concat_rows(const std::vector<Id>& parts) {
  if (parts.empty()) throw InvalidArgument("concat_rows: no parts");
  Eigen::Index rows = 0;
  for (Id p : parts) rows += value(p).rows();
  Mat out(rows, value(parts.front()).cols());
  Eigen::Index at = 0;
  for (Id p : parts) {
    out.middleRows(at, value(p).rows()) = value(p);
    at += value(p).rows();
  }
  return emit(std::move(out), [parts](Graph& g, Node& n) {
    Eigen::Index at = 0;
    for (Id p : parts) {
      Eigen::Index r = g.value(p).rows();
      g.grad_of(p) += n.grad.middleRows(at, r);
      at += r;
    }
  });
}

Graph::Id Graph::slice_rows(Id a, int begin, int count) {
  Mat out = value(a).middleRows(begin, count);
  return emit(std::move(out), [a, begin, count](Graph& g, Node& n) {
    g.grad_of(a).middleRows(begin, count) += n.grad;
  });
}

Graph::Id Graph::repeat_rows(Id a, int n_rows) {
  const Mat& v = value(a);
  Mat out(n_rows, v.cols());
  for (int r = 0; r < n_rows; ++r) out.row(r) = v.row(0);
  return emit(std::move(out), [a](Graph& g, Node& n) {
    g.grad_of(a) += n.grad.colwise().sum();
  });
}

Graph::Id Graph::transpose(Id a) {
  Mat out = value(a).transpose();
  return emit(std::move(out), [a](Graph& g, Node& n) {
    g.grad_of(a) += n.grad.transpose();
  });
}

Graph::Id Graph::segment_max(Id a, std::vector<int> offsets) {
  const Mat& v = value(a);
  int segments = static_cast<int>(offsets.size()) - 1;
  Mat out = Mat::Zero(segments, v.cols());
  std::vector<int> argmax(static_cast<size_t>(segments) * v.cols(), -1);
  for (int s = 0; s < segments; ++s) {
    int lo = offsets[s], hi = offsets[s + 1];
    if (lo >= hi) continue;
    for (Eigen::Index c = 0; c < v.cols(); ++c) {
      int best = lo;
      for (int r = lo + 1; r < hi; ++r) {
        if (v(r, c) > v(best, c)) best = r;
      }
      out(s, c) = v(best, c);
      argmax[static_cast<size_t>(s) * v.cols() + c] = best;
    }
  }
  return emit(std::move(out),
              [a, argmax = std::move(argmax)](Graph& g, Node& n) {
                Mat& da = g.grad_of(a);
                for (Eigen::Index s = 0; s < n.grad.rows(); ++s) {
                  for (Eigen::Index c = 0; c < n.grad.cols(); ++c) {
                    int r = argmax[static_cast<size_t>(s) * n.grad.cols() + c];
                    if (r >= 0) da(r, c) += n.grad(s, c);
                  }
                }
              });
}

namespace {

double log_sum_exp(const Eigen::Ref<const Eigen::RowVectorXd>& z) {
  double m = z.maxCoeff();
  return m + std::log((z.array() - m).exp().sum());
}

} // namespace

Graph::Id Graph::cross_entropy_logits(Id logits, int target) {
  const Mat& z = value(logits);
  if (z.rows() != 1 || target < 0 || target >= z.cols()) {
    throw InvalidArgument("cross_entropy_logits: bad shape or target");
  }
  Mat out(1, 1);
  out(0, 0) = log_sum_exp(z.row(0)) - z(0, target);
  return emit(std::move(out), [logits, target](Graph& g, Node& n) {
    const Mat& z = g.value(logits);
    double m = z.row(0).maxCoeff();
    Eigen::RowVectorXd p = (z.row(0).array() - m).exp();
    p /= p.sum();
    p(target) -= 1.0;
    g.grad_of(logits).row(0) += n.grad(0, 0) * p;
  });
}

Graph::Id Graph::mean_cross_entropy_rows(Id logits, std::vector<int> targets) {
  const Mat& z = value(logits);
  if (z.rows() != static_cast<Eigen::Index>(targets.size())) {
    throw InvalidArgument("mean_cross_entropy_rows: target count mismatch");
  }
  double total = 0.0;
  for (Eigen::Index r = 0; r < z.rows(); ++r) {
    total += log_sum_exp(z.row(r)) - z(r, targets[r]);
  }
  Mat out(1, 1);
  out(0, 0) = total / static_cast<double>(z.rows());
  return emit(std::move(out),
              [logits, targets = std::move(targets)](Graph& g, Node& n) {
                const Mat& z = g.value(logits);
                double inv = n.grad(0, 0) / static_cast<double>(z.rows());
                Mat& da = g.grad_of(logits);
                for (Eigen::Index r = 0; r < z.rows(); ++r) {
                  double m = z.row(r).maxCoeff();
                  Eigen::RowVectorXd p = (z.row(r).array() - m).exp();
                  p /= p.sum();
                  p(targets[r]) -= 1.0;
                  da.row(r) += inv * p;
                }
              });
}

Graph::Id Graph::smooth_l1_sum(Id pred, Mat target) {
  const Mat& p = value(pred);
  Mat d = p - target;
  double total = 0.0;
  for (Eigen::Index i = 0; i < d.size(); ++i) {
    double e = std::abs(d.data()[i]);
    total += e < 1.0 ? 0.5 * e * e : e - 0.5;
  }
  Mat out(1, 1);
  out(0, 0) = total;
  return emit(std::move(out), [pred, d = std::move(d)](Graph& g, Node& n) {
    g.grad_of(pred) += n.grad(0, 0) * d.unaryExpr([](double e) {
      return e < -1.0 ? -1.0 : (e > 1.0 ? 1.0 : e);
    });
  });
}

Graph::Id Graph::sum_all(Id a) {
  Mat out(1, 1);
  out(0, 0) = value(a).sum();
  return emit(std::move(out), [a](Graph& g, Node& n) {
    const Mat& v = g.value(a);
    g.grad_of(a) += Mat::Constant(v.rows(), v.cols(), n.grad(0, 0));
  });
}

void Graph::backward(Id root) {
  const Mat& r = value(root);
  if (r.rows() != 1 || r.cols() != 1) {
    throw InvalidArgument("backward: root must be a scalar node");
  }
  grad_of(root)(0, 0) = 1.0;
  for (Id id = static_cast<Id>(nodes_.size()) - 1; id >= 0; --id) {
    Node& n = nodes_[id];
    if (!n.grad_live || !n.back) continue;
    n.back(*this, n);
  }
}

} // namespace erupoint::fusion
