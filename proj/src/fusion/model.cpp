// Copyright (C) 2026 erupoint contributors
// SPDX-License-Identifier: Apache-2.0
#include "erupoint/fusion/model.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <map>
#include <numeric>

#include "erupoint/error.hpp"
#include "erupoint/rng.hpp"

namespace erupoint::fusion {

using geom::Aabb;
using geom::PointCloud;
using geom::Vec3;

Tensor Tensor::from_mat(std::string name, const Mat& m) {
  Tensor t;
  t.name = std::move(name);
  t.shape = {static_cast<int>(m.rows()), static_cast<int>(m.cols())};
  t.values.assign(m.data(), m.data() + m.size());
  return t;
}

Mat Tensor::to_mat() const {
  if (shape.size() != 2 ||
      values.size() != static_cast<size_t>(shape[0]) * shape[1]) {
    throw InvalidArgument("tensor " + name + ": shape/value mismatch");
  }
  Mat m(shape[0], shape[1]);
  std::copy(values.begin(), values.end(), m.data());
  return m;
}

// ---- Parameters ----

namespace {

template <typename Self, typename Fn>
void visit_impl(Self& p, const Fn& fn) {
  fn("embed", p.embed);
  fn("gru.wz", p.gru_wz);
  fn("gru.uz", p.gru_uz);
  fn("gru.bz", p.gru_bz);
  fn("gru.wr", p.gru_wr);
  fn("gru.ur", p.gru_ur);
  fn("gru.br", p.gru_br);
  fn("gru.wc", p.gru_wc);
  fn("gru.uc", p.gru_uc);
  fn("gru.bc", p.gru_bc);
  fn("lattn.wq", p.lattn_wq);
  fn("lattn.wk", p.lattn_wk);
  fn("lattn.wv", p.lattn_wv);
  fn("lattn.wo", p.lattn_wo);
  fn("ges.w1", p.ges_w1);
  fn("ges.b1", p.ges_b1);
  fn("ges.w2", p.ges_w2);
  fn("ges.b2", p.ges_b2);
  fn("ges.wp", p.ges_wp);
  fn("ges.bp", p.ges_bp);
  fn("prop.w1", p.prop_w1);
  fn("prop.b1", p.prop_b1);
  fn("prop.w2", p.prop_w2);
  fn("prop.b2", p.prop_b2);
  fn("prop.wp", p.prop_wp);
  fn("prop.bp", p.prop_bp);
  fn("fuse.w", p.fuse_w);
  fn("fuse.b", p.fuse_b);
  fn("fuse.ln_g", p.fuse_ln_g);
  fn("fuse.ln_b", p.fuse_ln_b);
  for (size_t i = 0; i < p.decoder.size(); ++i) {
    auto& d = p.decoder[i];
    std::string pre = "dec" + std::to_string(i) + ".";
    fn(pre + "sa_wq", d.sa_wq);
    fn(pre + "sa_wk", d.sa_wk);
    fn(pre + "sa_wv", d.sa_wv);
    fn(pre + "sa_wo", d.sa_wo);
    fn(pre + "ln1_g", d.ln1_g);
    fn(pre + "ln1_b", d.ln1_b);
    fn(pre + "ca_wq", d.ca_wq);
    fn(pre + "ca_wk", d.ca_wk);
    fn(pre + "ca_wv", d.ca_wv);
    fn(pre + "ca_wo", d.ca_wo);
    fn(pre + "ln2_g", d.ln2_g);
    fn(pre + "ln2_b", d.ln2_b);
    fn(pre + "ff_w1", d.ff_w1);
    fn(pre + "ff_b1", d.ff_b1);
    fn(pre + "ff_w2", d.ff_w2);
    fn(pre + "ff_b2", d.ff_b2);
    fn(pre + "ln3_g", d.ln3_g);
    fn(pre + "ln3_b", d.ln3_b);
  }
  fn("head.w", p.head_w);
  fn("head.b", p.head_b);
  fn("cls.w", p.cls_w);
  fn("cls.b", p.cls_b);
  fn("objn.w", p.objn_w);
  fn("objn.b", p.objn_b);
  fn("sem.w", p.sem_w);
  fn("sem.b", p.sem_b);
  fn("center.w", p.center_w);
  fn("center.b", p.center_b);
  fn("szcls.w", p.szcls_w);
  fn("szcls.b", p.szcls_b);
  fn("szreg.w", p.szreg_w);
  fn("szreg.b", p.szreg_b);
}

void allocate(ModelParams& p) {
  const FusionConfig& c = p.cfg;
  int H = c.hidden, D = c.embed_dim;
  p.embed.resize(c.embed_vocab, D);
  for (Mat* w : {&p.gru_wz, &p.gru_wr, &p.gru_wc}) w->resize(D, H);
  for (Mat* u : {&p.gru_uz, &p.gru_ur, &p.gru_uc}) u->resize(H, H);
  for (Mat* b : {&p.gru_bz, &p.gru_br, &p.gru_bc}) b->resize(1, H);
  for (Mat* w : {&p.lattn_wq, &p.lattn_wk, &p.lattn_wv, &p.lattn_wo}) {
    w->resize(H, H);
  }
  p.ges_w1.resize(6, H);
  p.ges_b1.resize(1, H);
  p.ges_w2.resize(H, H);
  p.ges_b2.resize(1, H);
  p.ges_wp.resize(H, H);
  p.ges_bp.resize(1, H);
  p.prop_w1.resize(6, H);
  p.prop_b1.resize(1, H);
  p.prop_w2.resize(H, H);
  p.prop_b2.resize(1, H);
  p.prop_wp.resize(H + 6, H);
  p.prop_bp.resize(1, H);
  p.fuse_w.resize(2 * H, H);
  p.fuse_b.resize(1, H);
  p.fuse_ln_g.resize(1, H);
  p.fuse_ln_b.resize(1, H);
  p.decoder.resize(c.decoder_layers);
  for (DecoderLayerParams& d : p.decoder) {
    for (Mat* w : {&d.sa_wq, &d.sa_wk, &d.sa_wv, &d.sa_wo, &d.ca_wq, &d.ca_wk,
                   &d.ca_wv, &d.ca_wo}) {
      w->resize(H, H);
    }
    for (Mat* v :
         {&d.ln1_g, &d.ln1_b, &d.ln2_g, &d.ln2_b, &d.ln3_g, &d.ln3_b}) {
      v->resize(1, H);
    }
    d.ff_w1.resize(H, c.ffn_mult * H);
    d.ff_b1.resize(1, c.ffn_mult * H);
    d.ff_w2.resize(c.ffn_mult * H, H);
    d.ff_b2.resize(1, H);
  }
  p.head_w.resize(H, 1);
  p.head_b.resize(1, 1);
  p.cls_w.resize(H, c.n_classes);
  p.cls_b.resize(1, c.n_classes);
  p.objn_w.resize(H, 2);
  p.objn_b.resize(1, 2);
  p.sem_w.resize(H, c.n_classes);
  p.sem_b.resize(1, c.n_classes);
  p.center_w.resize(H, 3);
  p.center_b.resize(1, 3);
  p.szcls_w.resize(H, c.size_bins);
  p.szcls_b.resize(1, c.size_bins);
  p.szreg_w.resize(H, 3);
  p.szreg_b.resize(1, 3);
}

bool ends_with(const std::string& s, const std::string& suffix) {
  return s.size() >= suffix.size() &&
         s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

bool is_gain(const std::string& name) {
  return ends_with(name, "_g") || ends_with(name, "ln_g");
}

bool is_bias(const std::string& name) {
  if (ends_with(name, "_b")) return true;
  size_t dot = name.rfind('.');
  if (dot == std::string::npos) return false;
  std::string leaf = name.substr(dot + 1);
  return !leaf.empty() && leaf[0] == 'b';
}

} // namespace

ModelParams ModelParams::init(const FusionConfig& cfg) {
  ModelParams p;
  p.cfg = cfg;
  allocate(p);
  Rng rng(Rng::mix(cfg.init_seed, 0x9a7a11ceull));
  p.visit([&](const std::string& name, Mat& m) {
    if (is_gain(name)) {
      m.setOnes();
    } else if (is_bias(name) || name == "center.w" || name == "szreg.w") {
      // Regression heads start at their optimum (zero offsets under
      // ground-truth proposals); otherwise the 10x detection weight forces
      // the stable step size far below what the grounding branch needs.
      m.setZero();
    } else {
      double limit = std::sqrt(6.0 / (m.rows() + m.cols()));
      if (name == "embed") limit = std::sqrt(3.0 / m.cols());
      // Auxiliary heads start small: their 10x-weighted gradients otherwise
      // shove the shared trunk toward a saturated uniform saddle before the
      // grounding signal has any say.
      if (name == "objn.w" || name == "sem.w" || name == "szcls.w" ||
          name == "cls.w") {
        limit *= 0.1;
      }
      for (Eigen::Index i = 0; i < m.size(); ++i) {
        m.data()[i] = rng.uniform(-limit, limit);
      }
    }
  });
  return p;
}

ModelParams ModelParams::zeros_like() const {
  ModelParams z;
  z.cfg = cfg;
  allocate(z);
  z.visit([](const std::string&, Mat& m) { m.setZero(); });
  return z;
}

void ModelParams::visit(
    const std::function<void(const std::string&, Mat&)>& fn) {
  visit_impl(*this, fn);
}

void ModelParams::visit(
    const std::function<void(const std::string&, const Mat&)>& fn) const {
  visit_impl(*this, fn);
}

void ModelParams::add_scaled(const ModelParams& other, double scale) {
  std::vector<const Mat*> theirs;
  other.visit([&](const std::string&, const Mat& m) { theirs.push_back(&m); });
  size_t i = 0;
  visit([&](const std::string&, Mat& m) { m += *theirs[i++] * scale; });
}

void ModelParams::scale_in_place(double s) {
  visit([&](const std::string&, Mat& m) { m *= s; });
}

namespace {
constexpr char kNetMagic[8] = {'E', 'R', 'U', 'N', 'E', 'T', '1', '\0'};
}

void ModelParams::save(const std::string& path) const {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open for writing: " + path);
  os.write(kNetMagic, sizeof(kNetMagic));

  std::vector<std::pair<std::string, const Mat*>> tensors;
  visit(
      [&](const std::string& n, const Mat& m) { tensors.emplace_back(n, &m); });

  Mat config(1, 12);
  config << cfg.hidden, cfg.embed_vocab, cfg.embed_dim, cfg.n_classes,
      cfg.size_bins, cfg.decoder_layers, cfg.ffn_mult, cfg.fps_centroids,
      cfg.group_radius, cfg.group_max_points, cfg.proposal_max_points,
      cfg.max_tokens;

  uint32_t count = static_cast<uint32_t>(tensors.size()) + 1;
  os.write(reinterpret_cast<const char*>(&count), sizeof(count));
  auto write_tensor = [&](const std::string& name, const Mat& m) {
    auto len = static_cast<uint16_t>(name.size());
    os.write(reinterpret_cast<const char*>(&len), sizeof(len));
    os.write(name.data(), len);
    uint8_t ndims = 2;
    os.write(reinterpret_cast<const char*>(&ndims), sizeof(ndims));
    uint32_t dims[2] = {static_cast<uint32_t>(m.rows()),
                        static_cast<uint32_t>(m.cols())};
    os.write(reinterpret_cast<const char*>(dims), sizeof(dims));
    for (Eigen::Index i = 0; i < m.size(); ++i) {
      float f = static_cast<float>(m.data()[i]);
      os.write(reinterpret_cast<const char*>(&f), sizeof(f));
    }
  };
  write_tensor("config", config);
  for (const auto& [name, m] : tensors) write_tensor(name, *m);
  if (!os) throw IoError("checkpoint write failed: " + path);
}

ModelParams ModelParams::load(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open: " + path);
  char magic[8];
  is.read(magic, sizeof(magic));
  if (!is || std::memcmp(magic, kNetMagic, sizeof(magic)) != 0) {
    throw IoError("not a checkpoint file: " + path);
  }
  uint32_t count = 0;
  is.read(reinterpret_cast<char*>(&count), sizeof(count));

  std::map<std::string, Mat> tensors;
  for (uint32_t i = 0; i < count; ++i) {
    uint16_t len = 0;
    is.read(reinterpret_cast<char*>(&len), sizeof(len));
    std::string name(len, '\0');
    is.read(name.data(), len);
    uint8_t ndims = 0;
    is.read(reinterpret_cast<char*>(&ndims), sizeof(ndims));
    if (ndims != 2) throw IoError("checkpoint: unsupported tensor rank");
    uint32_t dims[2];
    is.read(reinterpret_cast<char*>(dims), sizeof(dims));
    if (!is) throw IoError("checkpoint: truncated tensor header");
    Mat m(dims[0], dims[1]);
    for (Eigen::Index k = 0; k < m.size(); ++k) {
      float f;
      is.read(reinterpret_cast<char*>(&f), sizeof(f));
      m.data()[k] = f;
    }
    if (!is) throw IoError("checkpoint: truncated tensor payload");
    tensors.emplace(std::move(name), std::move(m));
  }

  auto cit = tensors.find("config");
  if (cit == tensors.end()) throw IoError("checkpoint lacks a config tensor");
  const Mat& c = cit->second;
  if (c.size() < 12) throw IoError("checkpoint config tensor is too short");
  FusionConfig cfg;
  cfg.hidden = static_cast<int>(c(0, 0));
  cfg.embed_vocab = static_cast<int>(c(0, 1));
  cfg.embed_dim = static_cast<int>(c(0, 2));
  cfg.n_classes = static_cast<int>(c(0, 3));
  cfg.size_bins = static_cast<int>(c(0, 4));
  cfg.decoder_layers = static_cast<int>(c(0, 5));
  cfg.ffn_mult = static_cast<int>(c(0, 6));
  cfg.fps_centroids = static_cast<int>(c(0, 7));
  cfg.group_radius = c(0, 8);
  cfg.group_max_points = static_cast<int>(c(0, 9));
  cfg.proposal_max_points = static_cast<int>(c(0, 10));
  cfg.max_tokens = static_cast<int>(c(0, 11));

  ModelParams p;
  p.cfg = cfg;
  allocate(p);
  p.visit([&](const std::string& name, Mat& m) {
    auto it = tensors.find(name);
    if (it == tensors.end()) throw IoError("checkpoint lacks tensor " + name);
    if (it->second.rows() != m.rows() || it->second.cols() != m.cols()) {
      throw IoError("checkpoint tensor " + name + " has the wrong shape");
    }
    m = it->second;
  });
  return p;
}

// ---- Preprocessing ----

namespace {

struct CanonPoint {
  Vec3 p;
  Vec3 n;
};

bool lex_less(const CanonPoint& a, const CanonPoint& b) {
  auto ta = std::tie(a.p.x, a.p.y, a.p.z, a.n.x, a.n.y, a.n.z);
  auto tb = std::tie(b.p.x, b.p.y, b.p.z, b.n.x, b.n.y, b.n.z);
  return ta < tb;
}

} // namespace

GesturePreproc preprocess_gesture(const PointCloud& agent_cloud,
                                  const FusionConfig& cfg) {
  if (agent_cloud.empty()) {
    throw InvalidArgument("encode_gesture: empty cloud");
  }
  size_t n = agent_cloud.size();
  std::vector<CanonPoint> pts(n);
  for (size_t i = 0; i < n; ++i) {
    pts[i].p = agent_cloud.points[i];
    pts[i].n = agent_cloud.has_normals() ? agent_cloud.normals[i] : Vec3{};
  }
  // Canonical order makes farthest-point sampling, grouping, and therefore
  // the whole encoder invariant to input permutation.
  std::sort(pts.begin(), pts.end(), lex_less);

  size_t m = std::min<size_t>(cfg.fps_centroids, n);
  std::vector<size_t> centroids;
  centroids.reserve(m);
  std::vector<double> dist(n, std::numeric_limits<double>::infinity());
  size_t cur = 0;
  centroids.push_back(cur);
  for (size_t step = 1; step < m; ++step) {
    size_t next = 0;
    double best = -1.0;
    for (size_t i = 0; i < n; ++i) {
      double d = (pts[i].p - pts[cur].p).squared_norm();
      if (d < dist[i]) dist[i] = d;
      if (dist[i] > best) {
        best = dist[i];
        next = i;
      }
    }
    centroids.push_back(next);
    cur = next;
  }

  double r2 = cfg.group_radius * cfg.group_radius;
  GesturePreproc out;
  out.offsets.reserve(centroids.size() + 1);
  out.offsets.push_back(0);
  std::vector<std::array<double, 6>> rows;
  for (size_t c : centroids) {
    int taken = 0;
    for (size_t i = 0; i < n && taken < cfg.group_max_points; ++i) {
      Vec3 rel = pts[i].p - pts[c].p;
      if (rel.squared_norm() > r2) continue;
      rows.push_back({rel.x, rel.y, rel.z, pts[i].n.x, pts[i].n.y, pts[i].n.z});
      ++taken;
    }
    out.offsets.push_back(static_cast<int>(rows.size()));
  }
  out.grouped.resize(rows.size(), 6);
  for (size_t r = 0; r < rows.size(); ++r) {
    for (int c = 0; c < 6; ++c) out.grouped(r, c) = rows[r][c];
  }
  return out;
}

ProposalPreproc preprocess_proposals(const PointCloud& scene_cloud,
                                     const std::vector<Aabb>& boxes,
                                     const FusionConfig& cfg) {
  if (boxes.empty()) throw InvalidArgument("encode_proposals: no boxes");
  ProposalPreproc out;
  out.offsets.push_back(0);
  std::vector<std::array<double, 6>> rows;
  out.box_geom.resize(boxes.size(), 6);
  for (size_t b = 0; b < boxes.size(); ++b) {
    const Aabb& box = boxes[b];
    Vec3 center = box.center();
    Vec3 size = box.size();
    int taken = 0;
    for (size_t i = 0;
         i < scene_cloud.size() && taken < cfg.proposal_max_points; ++i) {
      if (!box.contains(scene_cloud.points[i])) continue;
      Vec3 rel = scene_cloud.points[i] - center;
      Vec3 col = scene_cloud.has_colors() ? scene_cloud.colors[i] : Vec3{};
      rows.push_back({rel.x, rel.y, rel.z, col.x, col.y, col.z});
      ++taken;
    }
    out.offsets.push_back(static_cast<int>(rows.size()));
    out.empty.push_back(taken == 0 ? 1 : 0);
    // Absolute (scaled) center keeps the where-signal; size is scale-free.
    out.box_geom.row(b) << center.x * 0.4, center.y * 0.4, center.z * 0.4,
        size.x / 3.0, size.y / 3.0, size.z / 3.0;
  }
  out.box_points.resize(rows.size(), 6);
  for (size_t r = 0; r < rows.size(); ++r) {
    for (int c = 0; c < 6; ++c) out.box_points(r, c) = rows[r][c];
  }
  return out;
}

int hash_token_id(const std::string& token, int vocab) {
  uint64_t h = 1469598103934665603ull;
  for (char c : token) {
    h ^= static_cast<unsigned char>(c);
    h *= 1099511628211ull;
  }
  return static_cast<int>(h % static_cast<uint64_t>(vocab));
}

int hash_class_id(const std::string& label, int n_classes) {
  return hash_token_id(label, n_classes);
}

int size_bin_of(const Aabb& box, int bins) {
  double vol = std::max(box.volume(), 1e-6);
  double t = (std::log10(vol) + 3.0) / 4.5; // spans ~1e-3..30 m^3
  int bin = static_cast<int>(std::floor(t * bins));
  return std::clamp(bin, 0, bins - 1);
}

TrainingExample make_training_example(const place::Scene& scene, int gt_index,
                                      const std::vector<std::string>& tokens,
                                      const PointCloud& placed_agent,
                                      const FusionConfig& cfg) {
  if (gt_index < 0 || gt_index >= static_cast<int>(scene.objects.size())) {
    throw InvalidArgument("training example: gt_index out of range");
  }
  if (tokens.empty()) throw InvalidArgument("training example: no tokens");

  TrainingExample ex;
  ex.gesture = preprocess_gesture(placed_agent, cfg);
  for (const place::SceneObject& obj : scene.objects) {
    ex.boxes.push_back(obj.box);
    ex.sem_class.push_back(hash_class_id(obj.label, cfg.n_classes));
    ex.size_class.push_back(size_bin_of(obj.box, cfg.size_bins));
  }
  ex.proposals = preprocess_proposals(scene.cloud, ex.boxes, cfg);
  size_t keep = std::min<size_t>(tokens.size(), cfg.max_tokens);
  for (size_t i = 0; i < keep; ++i) {
    ex.token_ids.push_back(hash_token_id(tokens[i], cfg.embed_vocab));
  }
  ex.gt_index = gt_index;
  ex.target_class = hash_class_id(scene.objects[gt_index].label, cfg.n_classes);
  return ex;
}

TrainingExample make_training_example(const place::Scene& scene,
                                      const dataset::EruSample& sample,
                                      const body::AgentPool& pool,
                                      const FusionConfig& cfg) {
  int gt_index = -1;
  for (size_t i = 0; i < scene.objects.size(); ++i) {
    if (scene.objects[i].id == sample.object_id) {
      gt_index = static_cast<int>(i);
      break;
    }
  }
  if (gt_index < 0) {
    throw InvalidArgument("sample " + sample.sample_id +
                          " refers to a missing object");
  }
  PointCloud agent =
      pool.cloud(sample.agent_index)
          .transformed(dataset::placement_transform(sample.placement));
  return make_training_example(scene, gt_index, sample.tokens, agent, cfg);
}

// ---- Graph builders ----

namespace {

// Binds parameter matrices to graph leaves, routing gradients into the
// structurally identical accumulator when one is supplied.
struct ParamBinder {
  Graph& g;
  std::map<const Mat*, Mat*> grad_map;

  ParamBinder(Graph& graph, const ModelParams& p, ModelParams* grads)
      : g(graph) {
    if (grads) {
      std::vector<const Mat*> ps;
      std::vector<Mat*> gs;
      p.visit([&](const std::string&, const Mat& m) { ps.push_back(&m); });
      grads->visit([&](const std::string&, Mat& m) { gs.push_back(&m); });
      for (size_t i = 0; i < ps.size(); ++i) grad_map.emplace(ps[i], gs[i]);
    }
  }

  Graph::Id operator()(const Mat& value) {
    auto it = grad_map.find(&value);
    return g.param(&value, it == grad_map.end() ? nullptr : it->second);
  }
};

Graph::Id linear(Graph& g, Graph::Id x, Graph::Id w, Graph::Id b) {
  return g.add_rowvec(g.matmul(x, w), b);
}

Graph::Id attention(Graph& g, Graph::Id q_in, Graph::Id kv_in, Graph::Id wq,
                    Graph::Id wk, Graph::Id wv, Graph::Id wo, int hidden) {
  Graph::Id q = g.matmul(q_in, wq);
  Graph::Id k = g.matmul(kv_in, wk);
  Graph::Id v = g.matmul(kv_in, wv);
  Graph::Id scores = g.scale(g.matmul_nt(q, k), 1.0 / std::sqrt(hidden));
  Graph::Id attn = g.softmax_rows(scores);
  return g.matmul(g.matmul(attn, v), wo);
}

Graph::Id encode_gesture_graph(Graph& g, const GesturePreproc& pre,
                               const ModelParams& p, ParamBinder& P) {
  Graph::Id x = g.input(pre.grouped);
  Graph::Id h1 = g.tanh_act(linear(g, x, P(p.ges_w1), P(p.ges_b1)));
  Graph::Id h2 = g.tanh_act(linear(g, h1, P(p.ges_w2), P(p.ges_b2)));
  Graph::Id per_group = g.segment_max(h2, pre.offsets);
  Graph::Id global = g.segment_max(
      per_group, {0, static_cast<int>(pre.offsets.size()) - 1});
  return g.tanh_act(linear(g, global, P(p.ges_wp), P(p.ges_bp)));
}

struct LangNodes {
  Graph::Id f_l;
  Graph::Id f_l_global;
};

LangNodes encode_language_graph(Graph& g, const std::vector<int>& token_ids,
                                const ModelParams& p, ModelParams* grads,
                                ParamBinder& P) {
  int H = p.cfg.hidden;
  Graph::Id emb =
      g.embedding(&p.embed, grads ? &grads->embed : nullptr, token_ids);
  Graph::Id wz = P(p.gru_wz), uz = P(p.gru_uz), bz = P(p.gru_bz);
  Graph::Id wr = P(p.gru_wr), ur = P(p.gru_ur), br = P(p.gru_br);
  Graph::Id wc = P(p.gru_wc), uc = P(p.gru_uc), bc = P(p.gru_bc);

  Graph::Id h = g.input(Mat::Zero(1, H));
  std::vector<Graph::Id> states;
  states.reserve(token_ids.size());
  for (size_t t = 0; t < token_ids.size(); ++t) {
    Graph::Id x = g.slice_rows(emb, static_cast<int>(t), 1);
    Graph::Id z =
        g.sigmoid(g.add(g.add(g.matmul(x, wz), g.matmul(h, uz)), bz));
    Graph::Id r =
        g.sigmoid(g.add(g.add(g.matmul(x, wr), g.matmul(h, ur)), br));
    Graph::Id cand = g.tanh_act(
        g.add(g.add(g.matmul(x, wc), g.matmul(g.hadamard(r, h), uc)), bc));
    h = g.add(g.hadamard(z, h), g.hadamard(g.one_minus(z), cand));
    states.push_back(h);
  }
  Graph::Id hs = g.concat_rows(states);
  Graph::Id f_l = attention(g, hs, hs, P(p.lattn_wq), P(p.lattn_wk),
                            P(p.lattn_wv), P(p.lattn_wo), H);
  return {f_l, states.back()};
}

Graph::Id encode_proposals_graph(Graph& g, const ProposalPreproc& pre,
                                 const ModelParams& p, ParamBinder& P) {
  Graph::Id pts = g.input(pre.box_points);
  Graph::Id h1 = g.tanh_act(linear(g, pts, P(p.prop_w1), P(p.prop_b1)));
  Graph::Id h2 = g.tanh_act(linear(g, h1, P(p.prop_w2), P(p.prop_b2)));
  Graph::Id pooled = g.segment_max(h2, pre.offsets);
  Graph::Id with_geom = g.concat_cols(pooled, g.input(pre.box_geom));
  return g.tanh_act(linear(g, with_geom, P(p.prop_wp), P(p.prop_bp)));
}

Graph::Id fuse_graph(Graph& g, Graph::Id f_p, Graph::Id f_g, Graph::Id f_l,
                     const ModelParams& p, ParamBinder& P, int m_rows,
                     Graph::Id* logits_out) {
  int H = p.cfg.hidden;
  Graph::Id g_rows = m_rows > 1 ? g.repeat_rows(f_g, m_rows) : f_g;
  // Normalized fused features; without this the 10x detection branch can
  // saturate the block into identical rows, a dead symmetric saddle.
  Graph::Id fused = g.layer_norm_rows(
      g.tanh_act(linear(g, g.concat_cols(f_p, g_rows), P(p.fuse_w),
                        P(p.fuse_b))),
      P(p.fuse_ln_g), P(p.fuse_ln_b));

  Graph::Id x = fused;
  for (const DecoderLayerParams& d : p.decoder) {
    Graph::Id sa =
        attention(g, x, x, P(d.sa_wq), P(d.sa_wk), P(d.sa_wv), P(d.sa_wo), H);
    x = g.layer_norm_rows(g.add(x, sa), P(d.ln1_g), P(d.ln1_b));
    Graph::Id ca = attention(g, x, f_l, P(d.ca_wq), P(d.ca_wk), P(d.ca_wv),
                             P(d.ca_wo), H);
    x = g.layer_norm_rows(g.add(x, ca), P(d.ln2_g), P(d.ln2_b));
    Graph::Id ff =
        linear(g, g.tanh_act(linear(g, x, P(d.ff_w1), P(d.ff_b1))),
               P(d.ff_w2), P(d.ff_b2));
    x = g.layer_norm_rows(g.add(x, ff), P(d.ln3_g), P(d.ln3_b));
  }
  Graph::Id logits = g.transpose(linear(g, x, P(p.head_w), P(p.head_b)));
  if (logits_out) *logits_out = logits;
  return x;
}

} // namespace

ForwardNodes build_forward(Graph& g, const TrainingExample& ex,
                           const ModelParams& params, ModelParams* grads) {
  ParamBinder P{g, params, grads};
  ForwardNodes out;
  out.f_g = encode_gesture_graph(g, ex.gesture, params, P);
  LangNodes lang = encode_language_graph(g, ex.token_ids, params, grads, P);
  out.f_l = lang.f_l;
  out.f_l_global = lang.f_l_global;
  out.f_p = encode_proposals_graph(g, ex.proposals, params, P);
  out.dec_out = fuse_graph(g, out.f_p, out.f_g, out.f_l, params, P,
                           static_cast<int>(ex.boxes.size()), &out.logits);
  out.conf = g.softmax_rows(out.logits);
  return out;
}

LossNodes build_loss(Graph& g, const ForwardNodes& fwd,
                     const TrainingExample& ex, const ModelParams& params,
                     ModelParams* grads) {
  ParamBinder P{g, params, grads};
  int m = static_cast<int>(ex.boxes.size());

  LossNodes ls;
  ls.loc = g.cross_entropy_logits(fwd.logits, ex.gt_index);
  Graph::Id cls_logits =
      linear(g, fwd.f_l_global, P(params.cls_w), P(params.cls_b));
  ls.cls = g.cross_entropy_logits(cls_logits, ex.target_class);

  Graph::Id objn = linear(g, fwd.dec_out, P(params.objn_w), P(params.objn_b));
  ls.objn = g.mean_cross_entropy_rows(objn, std::vector<int>(m, 1));
  Graph::Id sem = linear(g, fwd.dec_out, P(params.sem_w), P(params.sem_b));
  ls.sem = g.mean_cross_entropy_rows(sem, ex.sem_class);

  Graph::Id center =
      linear(g, fwd.dec_out, P(params.center_w), P(params.center_b));
  ls.center = g.scale(g.smooth_l1_sum(center, Mat::Zero(m, 3)), 1.0 / m);
  Graph::Id szcls =
      linear(g, fwd.dec_out, P(params.szcls_w), P(params.szcls_b));
  ls.szcls = g.mean_cross_entropy_rows(szcls, ex.size_class);
  Graph::Id szreg =
      linear(g, fwd.dec_out, P(params.szreg_w), P(params.szreg_b));
  ls.szreg = g.scale(g.smooth_l1_sum(szreg, Mat::Zero(m, 3)), 1.0 / m);

  // L_box = center + 0.1 szcls + szreg; L_det adds vote(=0), 0.1 objn,
  // 0.1 sem; L_total = 0.3 loc + 10 det + 0.1 cls.
  Graph::Id box = g.add(g.add(ls.center, g.scale(ls.szcls, 0.1)), ls.szreg);
  Graph::Id det =
      g.add(g.add(g.scale(ls.objn, 0.1), g.scale(ls.sem, 0.1)), box);
  ls.total = g.add(g.add(g.scale(ls.loc, 0.3), g.scale(det, 10.0)),
                   g.scale(ls.cls, 0.1));
  return ls;
}

// ---- Public operations ----

Tensor encode_gesture(const PointCloud& agent_cloud,
                      const ModelParams& params) {
  GesturePreproc pre = preprocess_gesture(agent_cloud, params.cfg);
  Graph g;
  ParamBinder P{g, params, nullptr};
  Graph::Id id = encode_gesture_graph(g, pre, params, P);
  return Tensor::from_mat("f_g", g.value(id));
}

std::pair<Tensor, Tensor> encode_language(
    const std::vector<std::string>& tokens, const ModelParams& params) {
  if (tokens.empty() ||
      tokens.size() > static_cast<size_t>(params.cfg.max_tokens)) {
    throw InvalidArgument("encode_language: token count outside [1, " +
                          std::to_string(params.cfg.max_tokens) + "]");
  }
  std::vector<int> ids;
  ids.reserve(tokens.size());
  for (const std::string& t : tokens) {
    ids.push_back(hash_token_id(t, params.cfg.embed_vocab));
  }
  Graph g;
  ParamBinder P{g, params, nullptr};
  LangNodes lang = encode_language_graph(g, ids, params, nullptr, P);
  return {Tensor::from_mat("f_l", g.value(lang.f_l)),
          Tensor::from_mat("f_l_global", g.value(lang.f_l_global))};
}

Tensor encode_proposals(const PointCloud& scene_cloud,
                        const std::vector<Aabb>& boxes,
                        const ModelParams& params) {
  ProposalPreproc pre = preprocess_proposals(scene_cloud, boxes, params.cfg);
  Graph g;
  ParamBinder P{g, params, nullptr};
  Graph::Id id = encode_proposals_graph(g, pre, params, P);
  return Tensor::from_mat("f_p", g.value(id));
}

std::vector<double> fuse(const Tensor& f_p, const Tensor& f_g,
                         const Tensor& f_l, const ModelParams& params) {
  Mat mp = f_p.to_mat(), mg = f_g.to_mat(), ml = f_l.to_mat();
  int H = params.cfg.hidden;
  if (mp.cols() != H || mg.cols() != H || ml.cols() != H || mg.rows() != 1) {
    throw InvalidArgument("fuse: feature dimensions disagree with the model");
  }
  Graph g;
  ParamBinder P{g, params, nullptr};
  Graph::Id logits = 0;
  fuse_graph(g, g.input(mp), g.input(mg), g.input(ml), params, P,
             static_cast<int>(mp.rows()), &logits);
  Graph::Id conf = g.softmax_rows(logits);
  const Mat& c = g.value(conf);
  return std::vector<double>(c.data(), c.data() + c.size());
}

LossBreakdown LossBreakdown::from_components(double loc, double cls,
                                             double vote_reg, double objn_cls,
                                             double sem_cls, double center_reg,
                                             double size_cls,
                                             double size_reg) {
  LossBreakdown b;
  b.loc = loc;
  b.cls = cls;
  b.vote_reg = vote_reg;
  b.objn_cls = objn_cls;
  b.sem_cls = sem_cls;
  b.center_reg = center_reg;
  b.size_cls = size_cls;
  b.size_reg = size_reg;
  b.box = center_reg + 0.1 * size_cls + size_reg;
  b.det = vote_reg + 0.1 * objn_cls + 0.1 * sem_cls + b.box;
  b.total = 0.3 * loc + 10.0 * b.det + 0.1 * cls;
  return b;
}

namespace {

double value_lse(const Eigen::Ref<const Eigen::RowVectorXd>& z) {
  double m = z.maxCoeff();
  return m + std::log((z.array() - m).exp().sum());
}

double value_mean_ce(const Mat& logits, const std::vector<int>& targets) {
  double total = 0.0;
  for (Eigen::Index r = 0; r < logits.rows(); ++r) {
    total += value_lse(logits.row(r)) - logits(r, targets[r]);
  }
  return total / static_cast<double>(logits.rows());
}

double value_smooth_l1_mean_rows(const Mat& pred) {
  double total = 0.0;
  for (Eigen::Index i = 0; i < pred.size(); ++i) {
    double e = std::abs(pred.data()[i]);
    total += e < 1.0 ? 0.5 * e * e : e - 0.5;
  }
  return total / static_cast<double>(pred.rows());
}

} // namespace

LossBreakdown compute_loss(const std::vector<double>& confidences,
                           int gt_index, const AuxPredictions& aux,
                           const LossTargets& targets) {
  int m = static_cast<int>(confidences.size());
  if (m == 0 || gt_index < 0 || gt_index >= m) {
    throw InvalidArgument("compute_loss: gt_index outside the proposal set");
  }
  if (aux.objn_logits.rows() != m || aux.sem_logits.rows() != m ||
      static_cast<int>(targets.sem_class.size()) != m ||
      static_cast<int>(targets.size_class.size()) != m) {
    throw InvalidArgument("compute_loss: auxiliary shapes disagree with M");
  }
  double loc = -std::log(std::max(confidences[gt_index], 1e-300));
  double cls = value_lse(aux.cls_logits.row(0)) -
               aux.cls_logits(0, targets.target_class);
  double objn = value_mean_ce(aux.objn_logits, std::vector<int>(m, 1));
  double sem = value_mean_ce(aux.sem_logits, targets.sem_class);
  double center = value_smooth_l1_mean_rows(aux.center_pred);
  double szcls = value_mean_ce(aux.szcls_logits, targets.size_class);
  double szreg = value_smooth_l1_mean_rows(aux.szreg_pred);
  // Ground-truth proposals leave nothing for vote regression to move.
  return LossBreakdown::from_components(loc, cls, /*vote_reg=*/0.0, objn, sem,
                                        center, szcls, szreg);
}

ForwardResult run_forward(const TrainingExample& ex,
                          const ModelParams& params) {
  Graph g;
  ForwardNodes fwd = build_forward(g, ex, params, nullptr);
  ParamBinder P{g, params, nullptr};

  ForwardResult out;
  const Mat& conf = g.value(fwd.conf);
  out.confidences.assign(conf.data(), conf.data() + conf.size());
  out.aux.objn_logits =
      g.value(linear(g, fwd.dec_out, P(params.objn_w), P(params.objn_b)));
  out.aux.sem_logits =
      g.value(linear(g, fwd.dec_out, P(params.sem_w), P(params.sem_b)));
  out.aux.center_pred =
      g.value(linear(g, fwd.dec_out, P(params.center_w), P(params.center_b)));
  out.aux.szcls_logits =
      g.value(linear(g, fwd.dec_out, P(params.szcls_w), P(params.szcls_b)));
  out.aux.szreg_pred =
      g.value(linear(g, fwd.dec_out, P(params.szreg_w), P(params.szreg_b)));
  out.aux.cls_logits =
      g.value(linear(g, fwd.f_l_global, P(params.cls_w), P(params.cls_b)));

  LossTargets targets{ex.target_class, ex.sem_class, ex.size_class};
  out.loss = compute_loss(out.confidences, ex.gt_index, out.aux, targets);
  return out;
}

GradCheckResult grad_check(const ModelParams& params,
                           const std::vector<TrainingExample>& micro_batch,
                           uint64_t seed) {
  if (micro_batch.empty()) throw InvalidArgument("grad_check: empty batch");
  ModelParams work = params;
  double inv_b = 1.0 / static_cast<double>(micro_batch.size());

  auto batch_loss = [&]() {
    double total = 0.0;
    for (const TrainingExample& ex : micro_batch) {
      Graph g;
      ForwardNodes fwd = build_forward(g, ex, work, nullptr);
      LossNodes ls = build_loss(g, fwd, ex, work, nullptr);
      total += g.value(ls.total)(0, 0);
    }
    if (!std::isfinite(total)) {
      throw std::runtime_error("grad_check: non-finite loss");
    }
    return total * inv_b;
  };

  ModelParams grads = work.zeros_like();
  for (const TrainingExample& ex : micro_batch) {
    Graph g;
    ForwardNodes fwd = build_forward(g, ex, work, &grads);
    LossNodes ls = build_loss(g, fwd, ex, work, &grads);
    g.backward(ls.total);
  }
  grads.scale_in_place(inv_b);

  std::vector<std::pair<std::string, Mat*>> param_mats;
  std::vector<Mat*> grad_mats;
  work.visit(
      [&](const std::string& n, Mat& m) { param_mats.emplace_back(n, &m); });
  grads.visit([&](const std::string&, Mat& m) { grad_mats.push_back(&m); });

  Rng rng(seed);
  const double h = 1e-4;
  GradCheckResult result;
  for (size_t t = 0; t < param_mats.size(); ++t) {
    Mat& m = *param_mats[t].second;
    const Mat& gm = *grad_mats[t];
    Eigen::Index n = m.size();
    Eigen::Index want = std::max<Eigen::Index>(20, (n + 99) / 100);
    std::vector<Eigen::Index> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    if (want < n) {
      for (Eigen::Index i = 0; i < want; ++i) {
        Eigen::Index j = i + rng.uniform_u32(static_cast<uint32_t>(n - i));
        std::swap(idx[i], idx[j]);
      }
      idx.resize(want);
    }
    for (Eigen::Index i : idx) {
      double saved = m.data()[i];
      m.data()[i] = saved + h;
      double f_plus = batch_loss();
      m.data()[i] = saved - h;
      double f_minus = batch_loss();
      m.data()[i] = saved;
      double fd = (f_plus - f_minus) / (2.0 * h);
      double a = gm.data()[i];
      double rel =
          std::abs(a - fd) / std::max(std::abs(a) + std::abs(fd), 1e-3);
      if (rel > result.max_rel_error) {
        result.max_rel_error = rel;
        result.worst_param = param_mats[t].first;
      }
    }
  }
  return result;
}

} // namespace erupoint::fusion
