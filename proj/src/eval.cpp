// Copyright (C) 2026 erupoint contributors
// SPDX-License-Identifier: Apache-2.0
#include "erupoint/eval.hpp"

#include <algorithm>
#include <cctype>
#include <map>

#include <json.hpp>

#include "erupoint/error.hpp"

namespace erupoint::eval {

namespace {

std::string lower(const std::string& s) {
  std::string out = s;
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return out;
}

struct Tally {
  size_t count = 0;
  size_t correct_025 = 0;
  size_t correct_05 = 0;

  SubsetScores scores() const {
    SubsetScores s;
    s.count = count;
    if (count > 0) {
      s.acc_at_025 = static_cast<double>(correct_025) / count;
      s.acc_at_05 = static_cast<double>(correct_05) / count;
    }
    return s;
  }
};

} // namespace

SubsetClass classify_sample(const place::Scene& scene,
                            const place::SceneObject& target) {
  std::string label = lower(target.label);
  size_t same = 0;
  for (const place::SceneObject& obj : scene.objects) {
    if (lower(obj.label) == label) ++same;
  }
  return same == 1 ? SubsetClass::Unique : SubsetClass::Multiple;
}

EvalReport evaluate(const std::vector<ground::PredictionRecord>& predictions,
                    const std::vector<dataset::EruSample>& samples,
                    const std::vector<place::Scene>& scenes) {
  std::map<std::string, const ground::GroundingPrediction*> by_id;
  for (const ground::PredictionRecord& rec : predictions) {
    if (!by_id.emplace(rec.sample_id, &rec.prediction).second) {
      throw InvalidArgument("duplicate prediction for sample " + rec.sample_id);
    }
  }
  std::map<std::string, const place::Scene*> scene_by_id;
  for (const place::Scene& s : scenes) scene_by_id[s.scene_id] = &s;

  EvalReport report;
  Tally unique, multiple;
  for (const dataset::EruSample& sample : samples) {
    auto sit = scene_by_id.find(sample.scene_id);
    if (sit == scene_by_id.end()) {
      throw InvalidArgument("sample " + sample.sample_id +
                            " references unknown scene " + sample.scene_id);
    }
    const place::Scene& scene = *sit->second;
    const place::SceneObject& target = scene.object_or_throw(sample.object_id);
    Tally& tally =
        classify_sample(scene, target) == SubsetClass::Unique ? unique
                                                              : multiple;
    ++tally.count;

    auto pit = by_id.find(sample.sample_id);
    if (pit == by_id.end()) {
      ++report.missing_predictions;
      continue;
    }
    double iou = geom::aabb_iou(pit->second->box, target.box);
    if (iou >= 0.25) ++tally.correct_025;
    if (iou >= 0.5) ++tally.correct_05;
  }

  report.unique = unique.scores();
  report.multiple = multiple.scores();
  Tally overall;
  overall.count = unique.count + multiple.count;
  overall.correct_025 = unique.correct_025 + multiple.correct_025;
  overall.correct_05 = unique.correct_05 + multiple.correct_05;
  report.overall = overall.scores();
  return report;
}

std::string EvalReport::to_json() const {
  auto subset = [](const SubsetScores& s) {
    return nlohmann::json{{"count", s.count},
                          {"acc@0.25", s.acc_at_025},
                          {"acc@0.5", s.acc_at_05}};
  };
  nlohmann::json j{{"unique", subset(unique)},
                   {"multiple", subset(multiple)},
                   {"overall", subset(overall)},
                   {"missing_predictions", missing_predictions}};
  return j.dump(2);
}

} // namespace erupoint::eval
