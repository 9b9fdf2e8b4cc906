// Copyright (C) 2026 erupoint contributors
// SPDX-License-Identifier: Apache-2.0
#include "erupoint/ground.hpp"

#include <algorithm>
#include <fstream>

#include <json.hpp>

#include "erupoint/error.hpp"

namespace erupoint::ground {

using nlohmann::json;

const char* mode_name(Mode m) {
  switch (m) {
    case Mode::GestureOnly: return "gesture";
    case Mode::LangOnly: return "lang";
    case Mode::Full: return "full";
  }
  return "full";
}

Mode mode_from_name(const std::string& name) {
  if (name == "gesture") return Mode::GestureOnly;
  if (name == "lang") return Mode::LangOnly;
  if (name == "full") return Mode::Full;
  throw InvalidArgument("unknown grounding mode: " + name);
}

namespace {

constexpr double kMaxLangScore = 1.5; // label + two attribute categories

void require_objects(const place::Scene& scene) {
  if (scene.objects.empty()) {
    throw InvalidArgument("scene " + scene.scene_id +
                          " has no candidate objects");
  }
}

double lang_score(const place::SceneObject& obj,
                  const std::vector<std::string>& tokens,
                  const dataset::Lexicons& lexicons) {
  std::vector<std::string> label_words = dataset::tokenize(obj.label);
  bool label_match = !label_words.empty();
  for (const std::string& w : label_words) {
    label_match =
        label_match && std::find(tokens.begin(), tokens.end(), w) != tokens.end();
  }
  int hits = 0;
  bool color = false, shape = false, size = false;
  for (const std::string& tok : tokens) {
    color = color || lexicons.color.count(tok) > 0;
    shape = shape || lexicons.shape.count(tok) > 0;
    size = size || lexicons.size.count(tok) > 0;
  }
  hits = std::min(2, static_cast<int>(color) + static_cast<int>(shape) +
                         static_cast<int>(size));
  return (label_match ? 1.0 : 0.0) + 0.25 * hits;
}

const place::SceneObject& argmax_by_score(
    const place::Scene& scene, const std::vector<double>& scores) {
  size_t best = 0;
  for (size_t i = 1; i < scores.size(); ++i) {
    if (scores[i] > scores[best] ||
        (scores[i] == scores[best] &&
         scene.objects[i].id < scene.objects[best].id)) {
      best = i;
    }
  }
  return scene.objects[best];
}

} // namespace

GroundingPrediction ground_gesture_only(const place::Scene& scene,
                                        const vtl::GestureRay& gesture) {
  require_objects(scene);
  auto ranked = vtl::rank_objects(gesture, scene.objects);
  double mass = 0.0;
  for (const auto& [id, score] : ranked) {
    (void)id;
    mass += score;
  }
  const auto& [best_id, best_score] = ranked.front();
  GroundingPrediction pred;
  pred.object_id = best_id;
  pred.box = scene.object_or_throw(best_id).box;
  pred.confidence = mass > 0.0 ? best_score / mass : 0.0;
  pred.mode = Mode::GestureOnly;
  return pred;
}

GroundingPrediction ground_gesture_only(const place::Scene& scene,
                                        const body::PosedAgent& agent) {
  return ground_gesture_only(scene, vtl::gesture_ray(agent));
}

GroundingPrediction ground_lang_only(const place::Scene& scene,
                                     const std::vector<std::string>& tokens,
                                     const dataset::Lexicons& lexicons) {
  require_objects(scene);
  if (tokens.empty()) throw InvalidArgument("ground_lang_only: no tokens");
  std::vector<double> scores;
  scores.reserve(scene.objects.size());
  for (const place::SceneObject& obj : scene.objects) {
    scores.push_back(lang_score(obj, tokens, lexicons));
  }
  const place::SceneObject& best = argmax_by_score(scene, scores);
  GroundingPrediction pred;
  pred.object_id = best.id;
  pred.box = best.box;
  pred.confidence = *std::max_element(scores.begin(), scores.end()) /
                    kMaxLangScore;
  pred.mode = Mode::LangOnly;
  return pred;
}

GroundingPrediction ground_full(const place::Scene& scene,
                                const vtl::GestureRay& gesture,
                                const std::vector<std::string>& tokens,
                                const dataset::Lexicons& lexicons,
                                double w_gesture, double w_language) {
  require_objects(scene);
  if (tokens.empty()) throw InvalidArgument("ground_full: no tokens");
  if (w_gesture < 0.0 || w_language < 0.0 || w_gesture + w_language <= 0.0) {
    throw InvalidArgument("grounding weights must be non-negative, not both 0");
  }
  std::vector<double> scores;
  scores.reserve(scene.objects.size());
  for (const place::SceneObject& obj : scene.objects) {
    double g = vtl::vtl_score(gesture, obj.box);
    double l = lang_score(obj, tokens, lexicons) / kMaxLangScore;
    scores.push_back(w_gesture * g + w_language * l);
  }
  const place::SceneObject& best = argmax_by_score(scene, scores);
  GroundingPrediction pred;
  pred.object_id = best.id;
  pred.box = best.box;
  pred.confidence = *std::max_element(scores.begin(), scores.end()) /
                    (w_gesture + w_language);
  pred.mode = Mode::Full;
  return pred;
}

void write_predictions(const std::vector<PredictionRecord>& preds,
                       const std::string& path) {
  std::ofstream os(path);
  if (!os) throw IoError("cannot open for writing: " + path);
  for (const PredictionRecord& rec : preds) {
    const GroundingPrediction& p = rec.prediction;
    json j{{"sample_id", rec.sample_id},
           {"object_id", p.object_id},
           {"box",
            {{"min", {p.box.min.x, p.box.min.y, p.box.min.z}},
             {"max", {p.box.max.x, p.box.max.y, p.box.max.z}}}},
           {"confidence", p.confidence},
           {"mode", mode_name(p.mode)}};
    os << j.dump() << "\n";
  }
  if (!os) throw IoError("write failed: " + path);
}

std::vector<PredictionRecord> read_predictions(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open: " + path);
  std::vector<PredictionRecord> preds;
  std::string line;
  size_t line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      json j = json::parse(line);
      PredictionRecord rec;
      rec.sample_id = j.at("sample_id").get<std::string>();
      rec.prediction.object_id = j.at("object_id").get<int>();
      const json& mn = j.at("box").at("min");
      const json& mx = j.at("box").at("max");
      rec.prediction.box = {{mn.at(0).get<double>(), mn.at(1).get<double>(),
                             mn.at(2).get<double>()},
                            {mx.at(0).get<double>(), mx.at(1).get<double>(),
                             mx.at(2).get<double>()}};
      rec.prediction.confidence = j.at("confidence").get<double>();
      rec.prediction.mode = mode_from_name(j.at("mode").get<std::string>());
      preds.push_back(std::move(rec));
    } catch (const json::exception& e) {
      throw ParseError("predictions line " + std::to_string(line_no) + ": " +
                           e.what(),
                       line_no);
    }
  }
  return preds;
}

} // namespace erupoint::ground
