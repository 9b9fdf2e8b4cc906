// Copyright (C) 2026 erupoint contributors
// SPDX-License-Identifier: Apache-2.0
#include "erupoint/dataset.hpp"

#include <algorithm>
#include <cctype>
#include <filesystem>
#include <fstream>
#include <numeric>

#include <json.hpp>

#include "erupoint/error.hpp"
#include "erupoint/io.hpp"
#include "erupoint/rng.hpp"

namespace erupoint::dataset {

namespace fs = std::filesystem;
using nlohmann::json;

std::vector<std::string> tokenize(const std::string& text) {
  std::vector<std::string> tokens;
  std::string cur;
  for (char ch : text) {
    unsigned char c = static_cast<unsigned char>(ch);
    if (std::isalnum(c)) {
      cur.push_back(static_cast<char>(std::tolower(c)));
    } else if (!cur.empty()) {
      tokens.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) tokens.push_back(std::move(cur));
  return tokens;
}

EruSample EruSample::make(std::string sample_id, std::string scene_id,
                          int object_id, std::string description,
                          const place::Placement& placement) {
  EruSample s;
  s.sample_id = std::move(sample_id);
  s.scene_id = std::move(scene_id);
  s.object_id = object_id;
  s.tokens = tokenize(description);
  s.description = std::move(description);
  s.agent_index = placement.agent_index;
  s.placement = placement;
  return s;
}

const Lexicons& Lexicons::builtin() {
  static const Lexicons lex = [] {
    Lexicons l;
    l.spatial = {"left",    "right",   "near",    "next",     "beside",
                 "between", "corner",  "behind",  "front",    "above",
                 "below",   "under",   "over",    "end",      "middle",
                 "center",  "side",    "on",      "top",      "bottom",
                 "across",  "opposite", "closest", "farthest", "nearest",
                 "back"};
    l.color = {"red",    "green", "blue",   "yellow", "orange", "purple",
               "pink",   "brown", "black",  "white",  "gray",   "grey",
               "beige",  "tan",   "golden", "silver", "dark",   "light",
               "maroon", "teal"};
    l.shape = {"round",  "square",      "rectangular", "circular", "oval",
               "curved", "flat",        "angular",     "l", "u",
               "narrow", "wide",        "thin",        "thick",    "cylindrical"};
    l.size = {"big",   "small", "large", "tiny",  "tall",
              "short", "long",  "huge",  "little", "mini"};
    return l;
  }();
  return lex;
}

namespace {

std::set<std::string> load_word_file(const fs::path& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open lexicon file: " + path.string());
  std::set<std::string> words;
  std::string line;
  while (std::getline(is, line)) {
    auto toks = tokenize(line);
    if (!toks.empty()) words.insert(toks.front());
  }
  return words;
}

void save_word_file(const std::set<std::string>& words, const fs::path& path) {
  std::ofstream os(path);
  if (!os) throw IoError("cannot open for writing: " + path.string());
  for (const std::string& w : words) os << w << "\n";
}

} // namespace

Lexicons Lexicons::load_dir(const std::string& dir) {
  Lexicons l;
  l.spatial = load_word_file(fs::path(dir) / "spatial.txt");
  l.color = load_word_file(fs::path(dir) / "color.txt");
  l.shape = load_word_file(fs::path(dir) / "shape.txt");
  l.size = load_word_file(fs::path(dir) / "size.txt");
  return l;
}

void Lexicons::save_dir(const std::string& dir) const {
  fs::create_directories(dir);
  save_word_file(spatial, fs::path(dir) / "spatial.txt");
  save_word_file(color, fs::path(dir) / "color.txt");
  save_word_file(shape, fs::path(dir) / "shape.txt");
  save_word_file(size, fs::path(dir) / "size.txt");
}

geom::RigidTransform placement_transform(const place::Placement& placement) {
  geom::RigidTransform tf = geom::RigidTransform::rot_z(placement.yaw_deg);
  tf.t = placement.position;
  return tf;
}

PointCloud ComposedCloud::scene_only() const {
  PointCloud out;
  out.points.assign(cloud.points.begin(), cloud.points.begin() + scene_points);
  if (cloud.has_colors()) {
    out.colors.assign(cloud.colors.begin(), cloud.colors.begin() + scene_points);
  }
  if (cloud.has_normals()) {
    out.normals.assign(cloud.normals.begin(),
                       cloud.normals.begin() + scene_points);
  }
  return out;
}

PointCloud ComposedCloud::agent_only() const {
  PointCloud out;
  out.points.assign(cloud.points.begin() + scene_points, cloud.points.end());
  if (cloud.has_colors()) {
    out.colors.assign(cloud.colors.begin() + scene_points, cloud.colors.end());
  }
  if (cloud.has_normals()) {
    out.normals.assign(cloud.normals.begin() + scene_points,
                       cloud.normals.end());
  }
  return out;
}

ComposedCloud compose_scene(const place::Scene& scene, const EruSample& sample,
                            const body::AgentPool& pool) {
  if (sample.agent_index >= pool.size()) {
    throw InvalidArgument("sample references agent " +
                          std::to_string(sample.agent_index) +
                          " outside the pool");
  }
  PointCloud agent = pool.cloud(sample.agent_index)
                         .transformed(placement_transform(sample.placement));

  ComposedCloud out;
  out.cloud = scene.cloud;
  out.scene_points = scene.cloud.size();
  // Align feature channels: agents carry normals only; scenes may carry both.
  if (out.cloud.has_colors()) {
    agent.colors.assign(agent.size(), geom::Vec3{});
  }
  if (out.cloud.has_normals() && !agent.has_normals()) {
    agent.normals.assign(agent.size(), geom::Vec3{});
  }
  if (!out.cloud.has_normals() && agent.has_normals() && !out.cloud.empty()) {
    out.cloud.normals.assign(out.cloud.size(), geom::Vec3{});
  }
  out.cloud.append(agent);
  return out;
}

namespace {

json placement_to_json(const place::Placement& p) {
  return json{{"position", {{"x", p.position.x},
                            {"y", p.position.y},
                            {"z", p.position.z}}},
              {"yaw", p.yaw_deg},
              {"agent_index", p.agent_index}};
}

place::Placement placement_from_json(const json& j) {
  place::Placement p;
  const json& pos = j.at("position");
  p.position = {pos.at("x").get<double>(), pos.at("y").get<double>(),
                pos.at("z").get<double>()};
  p.yaw_deg = j.at("yaw").get<double>();
  p.agent_index = j.at("agent_index").get<uint32_t>();
  return p;
}

} // namespace

void write_samples(const std::vector<EruSample>& samples,
                   const std::string& path) {
  std::ofstream os(path);
  if (!os) throw IoError("cannot open for writing: " + path);
  for (const EruSample& s : samples) {
    json j{{"sample_id", s.sample_id},
           {"scene_id", s.scene_id},
           {"object_id", s.object_id},
           {"description", s.description},
           {"tokens", s.tokens},
           {"agent_index", s.agent_index},
           {"placement", placement_to_json(s.placement)}};
    os << j.dump() << "\n";
  }
  if (!os) throw IoError("write failed: " + path);
}

std::vector<EruSample> read_samples(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open: " + path);
  std::vector<EruSample> samples;
  std::string line;
  size_t line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      throw ParseError("samples line " + std::to_string(line_no) + ": " +
                           e.what(),
                       line_no);
    }
    try {
      EruSample s;
      s.sample_id = j.at("sample_id").get<std::string>();
      s.scene_id = j.at("scene_id").get<std::string>();
      s.object_id = j.at("object_id").get<int>();
      s.description = j.at("description").get<std::string>();
      s.tokens = j.at("tokens").get<std::vector<std::string>>();
      s.agent_index = j.at("agent_index").get<uint32_t>();
      s.placement = placement_from_json(j.at("placement"));
      if (s.tokens != tokenize(s.description)) {
        throw ParseError("samples line " + std::to_string(line_no) +
                             ": tokens do not match the description",
                         line_no);
      }
      samples.push_back(std::move(s));
    } catch (const json::exception& e) {
      throw ParseError("samples line " + std::to_string(line_no) + ": " +
                           e.what(),
                       line_no);
    }
  }
  return samples;
}

SplitSpec split_samples(const std::vector<EruSample>& samples,
                        double train_fraction, uint64_t seed) {
  if (!(train_fraction > 0.0) || !(train_fraction < 1.0)) {
    throw InvalidArgument("train_fraction must lie in (0, 1)");
  }
  std::map<std::string, size_t> counts;
  for (const EruSample& s : samples) ++counts[s.scene_id];

  std::vector<std::string> scenes;
  scenes.reserve(counts.size());
  for (const auto& [id, n] : counts) {
    (void)n;
    scenes.push_back(id);
  }
  Rng rng(seed);
  for (size_t i = scenes.size(); i > 1; --i) {
    std::swap(scenes[i - 1], scenes[rng.uniform_u32(static_cast<uint32_t>(i))]);
  }

  SplitSpec spec;
  spec.train_fraction = train_fraction;
  size_t total = samples.size();
  size_t cum = 0;
  bool train_done = false;
  for (const std::string& id : scenes) {
    if (!train_done) {
      spec.assignment[id] = "train";
      cum += counts[id];
      train_done = static_cast<double>(cum) >=
                   train_fraction * static_cast<double>(total);
    } else {
      spec.assignment[id] = "val";
    }
  }
  return spec;
}

DescriptionStats describe_stats(const std::vector<EruSample>& samples,
                                const Lexicons& lexicons) {
  DescriptionStats stats;
  stats.n_descriptions = samples.size();
  if (samples.empty()) return stats;

  size_t n_spatial = 0, n_color = 0, n_shape = 0, n_size = 0;
  for (const EruSample& s : samples) {
    bool spatial = false, color = false, shape = false, size = false;
    for (const std::string& tok : s.tokens) {
      spatial = spatial || lexicons.spatial.count(tok) > 0;
      color = color || lexicons.color.count(tok) > 0;
      shape = shape || lexicons.shape.count(tok) > 0;
      size = size || lexicons.size.count(tok) > 0;
    }
    n_spatial += spatial;
    n_color += color;
    n_shape += shape;
    n_size += size;
  }
  double denom = static_cast<double>(samples.size());
  stats.pct_spatial = 100.0 * n_spatial / denom;
  stats.pct_color = 100.0 * n_color / denom;
  stats.pct_shape = 100.0 * n_shape / denom;
  stats.pct_size = 100.0 * n_size / denom;
  return stats;
}

namespace {

json box_to_json(const geom::Aabb& b) {
  return json{{"min", {b.min.x, b.min.y, b.min.z}},
              {"max", {b.max.x, b.max.y, b.max.z}}};
}

geom::Aabb box_from_json(const json& j) {
  auto mn = j.at("min");
  auto mx = j.at("max");
  geom::Aabb b{{mn.at(0).get<double>(), mn.at(1).get<double>(),
                mn.at(2).get<double>()},
               {mx.at(0).get<double>(), mx.at(1).get<double>(),
                mx.at(2).get<double>()}};
  if (!b.valid()) throw InvalidArgument("box has min > max");
  return b;
}

} // namespace

place::Scene load_scene(const std::string& json_path) {
  std::ifstream is(json_path);
  if (!is) throw IoError("cannot open: " + json_path);
  json j;
  try {
    j = json::parse(is);
  } catch (const json::exception& e) {
    throw IoError("scene json " + json_path + ": " + e.what());
  }

  place::Scene scene;
  scene.scene_id = j.at("scene_id").get<std::string>();
  scene.floor_z = j.at("floor_z").get<double>();
  for (const json& obj : j.at("objects")) {
    place::SceneObject so;
    so.id = obj.at("id").get<int>();
    so.label = obj.at("label").get<std::string>();
    so.box = box_from_json(obj.at("box"));
    if (so.box.min.z < scene.floor_z - 1e-9) {
      throw InvalidArgument("object " + std::to_string(so.id) +
                            " extends below floor_z in " + scene.scene_id);
    }
    scene.objects.push_back(std::move(so));
  }
  for (size_t i = 0; i < scene.objects.size(); ++i) {
    for (size_t k = i + 1; k < scene.objects.size(); ++k) {
      if (scene.objects[i].id == scene.objects[k].id) {
        throw InvalidArgument("duplicate object id in " + scene.scene_id);
      }
    }
  }

  fs::path ply = fs::path(json_path).replace_extension(".ply");
  if (fs::exists(ply)) {
    scene.cloud = geom::read_ply(ply.string());
    for (place::SceneObject& so : scene.objects) {
      for (size_t i = 0; i < scene.cloud.size(); ++i) {
        if (so.box.contains(scene.cloud.points[i])) {
          so.point_indices.push_back(static_cast<uint32_t>(i));
        }
      }
    }
  }
  return scene;
}

std::vector<place::Scene> load_scene_dir(const std::string& dir) {
  if (!fs::is_directory(dir)) throw IoError("not a directory: " + dir);
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.path().extension() == ".json") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  std::vector<place::Scene> scenes;
  scenes.reserve(files.size());
  for (const fs::path& f : files) scenes.push_back(load_scene(f.string()));
  return scenes;
}

void save_scene(const place::Scene& scene, const std::string& dir) {
  fs::create_directories(dir);
  json objs = json::array();
  for (const place::SceneObject& so : scene.objects) {
    objs.push_back(
        {{"id", so.id}, {"label", so.label}, {"box", box_to_json(so.box)}});
  }
  json j{{"scene_id", scene.scene_id},
         {"floor_z", scene.floor_z},
         {"objects", objs}};
  fs::path base = fs::path(dir) / scene.scene_id;
  std::ofstream os(base.string() + ".json");
  if (!os) throw IoError("cannot open for writing: " + base.string() + ".json");
  os << j.dump(2) << "\n";
  geom::write_ply(scene.cloud, base.string() + ".ply");
}

} // namespace erupoint::dataset
