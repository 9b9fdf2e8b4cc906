// Copyright (C) 2026 erupoint contributors
// SPDX-License-Identifier: Apache-2.0
#include "erupoint/body.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <functional>
#include <set>
#include <thread>

#include "erupoint/error.hpp"
#include "erupoint/io.hpp"
#include "erupoint/rng.hpp"

namespace erupoint::body {

namespace {

// Shared proportion table, fractions of standing height.
constexpr double kPelvisZ = 0.530;
constexpr double kSpineTopZ = 0.820;
constexpr double kHeadZ = 0.935;
constexpr double kHeadTopZ = 0.995;
constexpr double kEyeZ = 0.936;
constexpr double kShoulderX = 0.115;
constexpr double kShoulderZ = 0.818;
constexpr double kUpperArm = 0.186;
constexpr double kForearm = 0.146;
constexpr double kHand = 0.108;
constexpr double kArmChain = kUpperArm + kForearm + kHand;
constexpr double kHipX = 0.060;
constexpr double kHipZ = 0.515;
constexpr double kKneeZ = 0.285;
constexpr double kAnkleZ = 0.045;
constexpr double kToeY = 0.085;
constexpr double kToeZ = 0.025;

struct PartSpec {
  const char* joint_a;
  const char* joint_b;
  double radius_frac;
};

const PartSpec kParts[] = {
    {"pelvis", "spine_top", 0.075},
    {"spine_top", "head_top", 0.055},
    {"shoulder_L", "elbow_L", 0.026},
    {"shoulder_R", "elbow_R", 0.026},
    {"elbow_L", "wrist_L", 0.020},
    {"elbow_R", "wrist_R", 0.020},
    {"wrist_L", "fingertip_L", 0.016},
    {"wrist_R", "fingertip_R", 0.016},
    {"hip_L", "knee_L", 0.042},
    {"hip_R", "knee_R", 0.042},
    {"knee_L", "ankle_L", 0.030},
    {"knee_R", "ankle_R", 0.030},
    {"ankle_L", "toe_L", 0.022},
    {"ankle_R", "toe_R", 0.022},
};

const std::map<std::string, std::string>& parent_map() {
  static const std::map<std::string, std::string> parents = {
      {"spine_top", "pelvis"},   {"head", "spine_top"},
      {"head_top", "head"},      {"eye", "head"},
      {"shoulder_L", "spine_top"}, {"shoulder_R", "spine_top"},
      {"elbow_L", "shoulder_L"}, {"elbow_R", "shoulder_R"},
      {"wrist_L", "elbow_L"},    {"wrist_R", "elbow_R"},
      {"fingertip_L", "wrist_L"}, {"fingertip_R", "wrist_R"},
      {"hip_L", "pelvis"},       {"hip_R", "pelvis"},
      {"knee_L", "hip_L"},       {"knee_R", "hip_R"},
      {"ankle_L", "knee_L"},     {"ankle_R", "knee_R"},
      {"toe_L", "ankle_L"},      {"toe_R", "ankle_R"},
  };
  return parents;
}

// Uniform capsule-surface sampling with analytic normals.
PointCloud sample_capsule(const Vec3& a, const Vec3& b, double radius,
                          double density, Rng& rng) {
  Vec3 axis = b - a;
  double len = axis.norm();
  Vec3 u = len > 1e-12 ? axis / len : Vec3{0, 0, 1};

  // Orthonormal frame around the axis.
  Vec3 ref = std::abs(u.z) < 0.9 ? Vec3{0, 0, 1} : Vec3{1, 0, 0};
  Vec3 e1 = u.cross(ref).normalized();
  Vec3 e2 = u.cross(e1);

  double side_area = 2.0 * geom::kPi * radius * len;
  double cap_area = 4.0 * geom::kPi * radius * radius;
  size_t n = std::max<size_t>(8, std::llround((side_area + cap_area) * density));
  size_t n_side = std::llround(n * side_area / (side_area + cap_area));

  PointCloud pc;
  pc.points.reserve(n);
  pc.normals.reserve(n);
  for (size_t i = 0; i < n; ++i) {
    if (i < n_side) {
      double t = rng.uniform() * len;
      double th = rng.uniform() * 2.0 * geom::kPi;
      Vec3 nrm = e1 * std::cos(th) + e2 * std::sin(th);
      pc.points.push_back(a + u * t + nrm * radius);
      pc.normals.push_back(nrm);
    } else {
      // Hemispherical caps, alternating ends.
      bool top = ((i - n_side) & 1) != 0;
      double h = rng.uniform();             // cos of polar angle, uniform area
      double th = rng.uniform() * 2.0 * geom::kPi;
      double s = std::sqrt(std::max(0.0, 1.0 - h * h));
      Vec3 dir = e1 * (s * std::cos(th)) + e2 * (s * std::sin(th)) +
                 u * (top ? h : -h);
      const Vec3& c = top ? b : a;
      pc.points.push_back(c + dir * radius);
      pc.normals.push_back(dir);
    }
  }
  return pc;
}

double adduction_deg(double shoulder_x_abs, double arm_len,
                     double elevation_deg) {
  // Swing about the shoulder's vertical axis that carries the fingertip onto
  // the body's mid-plane, so the eye-fingertip line runs straight ahead.
  // Unsolvable only for near-vertical arms; clamp there.
  double reach = arm_len * std::cos(geom::deg_to_rad(elevation_deg));
  if (reach <= shoulder_x_abs) return 90.0;
  return geom::rad_to_deg(std::asin(shoulder_x_abs / reach));
}

double perturb_of(const Pose& pose, const char* key) {
  auto it = pose.perturb_deg.find(key);
  return it == pose.perturb_deg.end() ? 0.0 : it->second;
}

} // namespace

const Vec3& HumanModel::joint(const std::string& name) const {
  auto it = joints.find(name);
  if (it == joints.end()) throw InvalidArgument("unknown joint: " + name);
  return it->second;
}

void HumanModel::validate() const {
  const Vec3& eye = joint("eye");
  if (eye.z <= joint("shoulder_L").z || eye.z <= joint("shoulder_R").z) {
    throw InvalidArgument("eye must sit above the shoulders");
  }
  // Connectivity: every joint must reach pelvis through the parent map.
  for (const auto& [name, pos] : joints) {
    (void)pos;
    std::string cur = name;
    std::set<std::string> seen;
    while (cur != "pelvis") {
      if (!seen.insert(cur).second) {
        throw InvalidArgument("joint tree has a cycle at " + cur);
      }
      auto it = parent_map().find(cur);
      if (it == parent_map().end()) {
        throw InvalidArgument("joint not connected to pelvis: " + name);
      }
      cur = it->second;
    }
  }
  for (const BodyPart& part : parts) {
    if (part.local_points.empty()) {
      throw InvalidArgument("part has an empty point set: " + part.joint_a);
    }
  }
}

const std::vector<ProfileSpec>& profile_table() {
  // Heights sum to 17.57 m so the ten-profile mean is exactly 1.757 m.
  static const std::vector<ProfileSpec> table = {
      {"adult_male_1", 1.92, 1.06},   {"adult_male_2", 1.86, 1.00},
      {"adult_male_3", 1.89, 1.10},   {"adult_female_1", 1.76, 0.94},
      {"adult_female_2", 1.72, 0.90}, {"adult_female_3", 1.80, 0.97},
      {"boy", 1.61, 0.86},            {"girl", 1.54, 0.84},
      {"elderly_male", 1.80, 1.02},   {"elderly_female", 1.67, 0.92},
  };
  return table;
}

Pose Pose::zero(Side side, double elevation_deg) {
  Pose p;
  p.side = side;
  p.elevation_deg = elevation_deg;
  p.perturb_deg = {{"upper_arm", 0.0}, {"lower_arm", 0.0}, {"hand", 0.0},
                   {"head", 0.0}};
  return p;
}

double elevation_at(int k) { return -90.0 + kElevationStepDeg * k; }

int elevation_index(double elevation_deg) {
  double kf = (elevation_deg + 90.0) / kElevationStepDeg;
  int k = static_cast<int>(std::lround(kf));
  if (k < 0 || k >= kElevationSteps ||
      std::abs(elevation_deg - elevation_at(k)) > 1e-9) {
    throw InvalidArgument("elevation off the 0.5 degree grid");
  }
  return k;
}

double snap_elevation(double raw_deg) {
  int k = static_cast<int>(std::lround((raw_deg + 90.0) / kElevationStepDeg));
  k = std::clamp(k, 0, kElevationSteps - 1);
  return elevation_at(k);
}

HumanModel build_human(int profile_id, uint64_t seed, const PoseConfig& cfg) {
  const auto& table = profile_table();
  if (profile_id < 0 || profile_id >= static_cast<int>(table.size())) {
    throw InvalidArgument("unknown profile id");
  }
  const ProfileSpec& spec = table[profile_id];
  double h = spec.height;

  HumanModel m;
  m.profile_id = profile_id;
  m.profile_name = spec.name;
  m.height = h;

  auto set = [&](const char* name, double x, double y, double z) {
    m.joints[name] = Vec3{x * h, y * h, z * h};
  };
  set("pelvis", 0, 0, kPelvisZ);
  set("spine_top", 0, 0, kSpineTopZ);
  set("head", 0, 0, kHeadZ);
  set("head_top", 0, 0, kHeadTopZ);
  set("eye", 0, 0, kEyeZ);
  for (int s = 0; s < 2; ++s) {
    double sx = s == 0 ? -1.0 : 1.0;
    const char* suffix = s == 0 ? "L" : "R";
    auto named = [&](const char* base) { return std::string(base) + "_" + suffix; };
    m.joints[named("shoulder")] = Vec3{sx * kShoulderX * h, 0, kShoulderZ * h};
    m.joints[named("elbow")] =
        Vec3{sx * kShoulderX * h, 0, (kShoulderZ - kUpperArm) * h};
    m.joints[named("wrist")] =
        Vec3{sx * kShoulderX * h, 0, (kShoulderZ - kUpperArm - kForearm) * h};
    m.joints[named("fingertip")] =
        Vec3{sx * kShoulderX * h, 0, (kShoulderZ - kArmChain) * h};
    m.joints[named("hip")] = Vec3{sx * kHipX * h, 0, kHipZ * h};
    m.joints[named("knee")] = Vec3{sx * kHipX * h, 0, kKneeZ * h};
    m.joints[named("ankle")] = Vec3{sx * kHipX * h, 0, kAnkleZ * h};
    m.joints[named("toe")] = Vec3{sx * kHipX * h, kToeY * h, kToeZ * h};
  }

  int part_index = 0;
  for (const PartSpec& ps : kParts) {
    Rng rng(Rng::mix(seed, (static_cast<uint64_t>(profile_id) << 8) |
                               static_cast<uint64_t>(part_index)));
    BodyPart part;
    part.joint_a = ps.joint_a;
    part.joint_b = ps.joint_b;
    part.radius = ps.radius_frac * h * spec.girth;
    part.local_points = sample_capsule(m.joint(ps.joint_a), m.joint(ps.joint_b),
                                       part.radius, cfg.surface_density, rng);
    m.parts.push_back(std::move(part));
    ++part_index;
  }
  m.validate();
  return m;
}

PoseTransforms pose_transforms(const HumanModel& model, const Pose& pose) {
  elevation_index(pose.elevation_deg); // grid check
  for (const auto& [seg, deg] : pose.perturb_deg) {
    (void)seg;
    if (deg < -3.0 || deg > 3.0) {
      throw InvalidArgument("segment perturbation outside [-3, 3] degrees");
    }
  }

  bool right = pose.side == Side::Right;
  const std::string suffix = right ? "_R" : "_L";
  Vec3 shoulder = model.joint("shoulder" + suffix);
  Vec3 elbow = model.joint("elbow" + suffix);
  Vec3 wrist = model.joint("wrist" + suffix);

  // Rest arm hangs at elevation -90; rotating about +X by (e + 90) raises it
  // through horizontal (e = 0) to vertical (e = +90).
  double alpha = pose.elevation_deg + 90.0 + perturb_of(pose, "upper_arm");
  double beta = adduction_deg(std::abs(shoulder.x), kArmChain * model.height,
                              pose.elevation_deg);
  RigidTransform lift = RigidTransform::rot_x(alpha);
  RigidTransform adduct = RigidTransform::rot_z(right ? beta : -beta);

  PoseTransforms out;
  out.upper_arm =
      RigidTransform::about_point(adduct.compose(lift), shoulder);
  out.lower_arm = out.upper_arm.compose(RigidTransform::about_point(
      RigidTransform::rot_x(perturb_of(pose, "lower_arm")), elbow));
  out.hand = out.lower_arm.compose(RigidTransform::about_point(
      RigidTransform::rot_x(perturb_of(pose, "hand")), wrist));
  out.head = RigidTransform::about_point(
      RigidTransform::rot_x(perturb_of(pose, "head")), model.joint("spine_top"));
  return out;
}

Landmarks pose_landmarks(const HumanModel& model, const Pose& pose) {
  PoseTransforms tf = pose_transforms(model, pose);
  const std::string suffix = pose.side == Side::Right ? "_R" : "_L";
  return {tf.head.apply(model.joint("eye")),
          tf.hand.apply(model.joint("fingertip" + suffix))};
}

double vtl_elevation_deg(const HumanModel& model, Side side,
                         double elevation_deg) {
  Landmarks lm = pose_landmarks(model, Pose::zero(side, elevation_deg));
  return geom::elevation_deg_of(lm.fingertip - lm.eye);
}

PosedAgent apply_pose(const HumanModel& model, const Pose& pose, uint64_t seed,
                      const PoseConfig& cfg) {
  PoseTransforms tf = pose_transforms(model, pose);
  const std::string suffix = pose.side == Side::Right ? "_R" : "_L";
  const std::string upper = "shoulder" + suffix;
  const std::string lower = "elbow" + suffix;
  const std::string hand = "wrist" + suffix;

  PointCloud raw;
  for (const BodyPart& part : model.parts) {
    const RigidTransform* t = nullptr;
    if (part.joint_a == upper) {
      t = &tf.upper_arm;
    } else if (part.joint_a == lower) {
      t = &tf.lower_arm;
    } else if (part.joint_a == hand) {
      t = &tf.hand;
    } else if (part.joint_a == "spine_top") {
      t = &tf.head;
    }
    raw.append(t ? part.local_points.transformed(*t) : part.local_points);
  }

  PointCloud reduced = geom::voxel_downsample(raw, cfg.voxel_size);
  PosedAgent agent;
  agent.cloud = geom::resample_fixed(reduced, cfg.agent_points,
                                     Rng::mix(seed, 0x5e5a3fb1u));
  agent.eye = tf.head.apply(model.joint("eye"));
  agent.fingertip = tf.hand.apply(model.joint("fingertip" + suffix));
  agent.pose = pose;
  agent.profile_id = model.profile_id;
  return agent;
}

PosedAgent pose_pointing(const HumanModel& model, Side side,
                         double elevation_deg, uint64_t seed,
                         const PoseConfig& cfg) {
  Rng rng(seed);
  Pose pose;
  pose.side = side;
  pose.elevation_deg = elevation_deg;
  for (const char* seg : {"upper_arm", "lower_arm", "hand", "head"}) {
    pose.perturb_deg[seg] =
        rng.truncated_normal(cfg.perturb_sigma_deg, cfg.perturb_clip_deg);
  }
  return apply_pose(model, pose, rng.next_u64(), cfg);
}

const AgentRecord& AgentPool::record(size_t i) const {
  if (i >= records_.size()) throw InvalidArgument("agent index out of range");
  return records_[i];
}

PointCloud AgentPool::cloud(size_t i) const {
  if (i >= records_.size()) throw InvalidArgument("agent index out of range");
  if (!clouds_.empty()) return clouds_[i];
  std::ifstream is(path_, std::ios::binary);
  if (!is) throw IoError("cannot open pool file: " + path_);
  is.seekg(static_cast<std::streamoff>(offsets_[i]));
  return geom::read_erupc(is);
}

uint32_t AgentPool::grid_index(int profile, Side side,
                               double elevation_deg) const {
  if (!grid_) throw InvalidArgument("pool is not grid-indexed");
  int k = elevation_index(elevation_deg);
  return static_cast<uint32_t>(profile) * 2u * kElevationSteps +
         static_cast<uint32_t>(side) * kElevationSteps +
         static_cast<uint32_t>(k);
}

uint32_t AgentPool::add(const PosedAgent& agent) {
  AgentRecord rec;
  rec.profile = static_cast<uint8_t>(agent.profile_id);
  rec.side = agent.pose.side;
  rec.elevation_deg = agent.pose.elevation_deg;
  rec.eye = agent.eye;
  rec.fingertip = agent.fingertip;
  records_.push_back(rec);
  clouds_.push_back(agent.cloud);
  grid_ = false;
  return static_cast<uint32_t>(records_.size() - 1);
}

namespace {

PosedAgent generate_agent(const std::vector<HumanModel>& models, uint64_t seed,
                          uint32_t index, const PoseConfig& cfg) {
  uint32_t profile = index / (2u * kElevationSteps);
  uint32_t rem = index % (2u * kElevationSteps);
  Side side = rem < kElevationSteps ? Side::Left : Side::Right;
  int k = static_cast<int>(rem % kElevationSteps);
  return pose_pointing(models[profile], side, elevation_at(k),
                       Rng::mix(seed, index), cfg);
}

// Deterministic parallel map: per-index seeds, results land in slots.
void run_chunk(const std::vector<HumanModel>& models, uint64_t seed,
               uint32_t begin, uint32_t end, const PoseConfig& cfg, int threads,
               std::vector<PosedAgent>& out) {
  out.resize(end - begin);
  if (threads <= 1) {
    for (uint32_t i = begin; i < end; ++i) {
      out[i - begin] = generate_agent(models, seed, i, cfg);
    }
    return;
  }
  std::vector<std::thread> workers;
  uint32_t n = end - begin;
  uint32_t per = (n + threads - 1) / threads;
  for (int t = 0; t < threads; ++t) {
    uint32_t lo = begin + t * per;
    uint32_t hi = std::min(end, lo + per);
    if (lo >= hi) break;
    workers.emplace_back([&, lo, hi] {
      for (uint32_t i = lo; i < hi; ++i) {
        out[i - begin] = generate_agent(models, seed, i, cfg);
      }
    });
  }
  for (auto& w : workers) w.join();
}

void write_record(std::ostream& os, const AgentRecord& rec,
                  const PointCloud& cloud) {
  os.put(static_cast<char>(rec.profile));
  os.put(static_cast<char>(rec.side));
  float f[7] = {static_cast<float>(rec.elevation_deg),
                static_cast<float>(rec.eye.x),  static_cast<float>(rec.eye.y),
                static_cast<float>(rec.eye.z),  static_cast<float>(rec.fingertip.x),
                static_cast<float>(rec.fingertip.y),
                static_cast<float>(rec.fingertip.z)};
  os.write(reinterpret_cast<const char*>(f), sizeof(f));
  geom::write_erupc(cloud, os);
}

constexpr char kPoolMagic[8] = {'E', 'R', 'U', 'P', 'O', 'O', 'L', '1'};
constexpr uint32_t kPoolChunk = 512;

} // namespace

AgentPool AgentPool::generate(const std::vector<HumanModel>& models,
                              uint64_t seed, const PoseConfig& cfg,
                              int threads) {
  if (models.size() != profile_table().size()) {
    throw InvalidArgument("generate: expected exactly 10 human models");
  }
  uint32_t total = static_cast<uint32_t>(models.size()) * 2u * kElevationSteps;
  AgentPool pool;
  pool.records_.resize(total);
  pool.clouds_.resize(total);
  for (uint32_t begin = 0; begin < total; begin += kPoolChunk) {
    uint32_t end = std::min(total, begin + kPoolChunk);
    std::vector<PosedAgent> chunk;
    run_chunk(models, seed, begin, end, cfg, threads, chunk);
    for (uint32_t i = begin; i < end; ++i) {
      PosedAgent& a = chunk[i - begin];
      pool.records_[i] = {static_cast<uint8_t>(a.profile_id), a.pose.side,
                          a.pose.elevation_deg, a.eye, a.fingertip};
      pool.clouds_[i] = std::move(a.cloud);
    }
  }
  pool.grid_ = true;
  return pool;
}

void AgentPool::generate_file(const std::vector<HumanModel>& models,
                              uint64_t seed, const std::string& path,
                              const PoseConfig& cfg, int threads) {
  if (models.size() != profile_table().size()) {
    throw InvalidArgument("generate: expected exactly 10 human models");
  }
  uint32_t total = static_cast<uint32_t>(models.size()) * 2u * kElevationSteps;
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open for writing: " + path);
  os.write(kPoolMagic, sizeof(kPoolMagic));
  uint32_t count = total;
  os.write(reinterpret_cast<const char*>(&count), sizeof(count));

  for (uint32_t begin = 0; begin < total; begin += kPoolChunk) {
    uint32_t end = std::min(total, begin + kPoolChunk);
    std::vector<PosedAgent> chunk;
    run_chunk(models, seed, begin, end, cfg, threads, chunk);
    for (uint32_t i = begin; i < end; ++i) {
      const PosedAgent& a = chunk[i - begin];
      AgentRecord rec{static_cast<uint8_t>(a.profile_id), a.pose.side,
                      a.pose.elevation_deg, a.eye, a.fingertip};
      write_record(os, rec, a.cloud);
    }
  }
  if (!os) throw IoError("pool write failed: " + path);
}

void AgentPool::save(const std::string& path) const {
  if (clouds_.empty() && !records_.empty()) {
    throw InvalidArgument("save: pool clouds are not resident");
  }
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open for writing: " + path);
  os.write(kPoolMagic, sizeof(kPoolMagic));
  uint32_t count = static_cast<uint32_t>(records_.size());
  os.write(reinterpret_cast<const char*>(&count), sizeof(count));
  for (size_t i = 0; i < records_.size(); ++i) {
    write_record(os, records_[i], clouds_[i]);
  }
  if (!os) throw IoError("pool write failed: " + path);
}

AgentPool AgentPool::load(const std::string& path, bool lazy) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open pool file: " + path);
  char magic[8];
  is.read(magic, sizeof(magic));
  if (!is || std::memcmp(magic, kPoolMagic, sizeof(magic)) != 0) {
    throw IoError("not an agent pool file: " + path);
  }
  uint32_t count = 0;
  is.read(reinterpret_cast<char*>(&count), sizeof(count));
  if (!is) throw IoError("pool: truncated header");

  AgentPool pool;
  pool.path_ = path;
  pool.records_.reserve(count);
  for (uint32_t i = 0; i < count; ++i) {
    int profile = is.get();
    int side = is.get();
    float f[7];
    is.read(reinterpret_cast<char*>(f), sizeof(f));
    if (!is || profile == EOF || side == EOF) {
      throw IoError("pool: truncated record");
    }
    AgentRecord rec;
    rec.profile = static_cast<uint8_t>(profile);
    rec.side = side == 0 ? Side::Left : Side::Right;
    rec.elevation_deg = f[0];
    rec.eye = {f[1], f[2], f[3]};
    rec.fingertip = {f[4], f[5], f[6]};
    pool.records_.push_back(rec);
    pool.offsets_.push_back(static_cast<uint64_t>(is.tellg()));
    if (lazy) {
      geom::skip_erupc(is);
    } else {
      pool.clouds_.push_back(geom::read_erupc(is));
    }
  }
  // Grid layout detection: 10 profiles x 2 sides x 360 elevations in order.
  uint32_t expected =
      static_cast<uint32_t>(profile_table().size()) * 2u * kElevationSteps;
  if (count == expected) {
    bool grid = true;
    for (uint32_t i = 0; i < count && grid; ++i) {
      uint32_t profile = i / (2u * kElevationSteps);
      uint32_t rem = i % (2u * kElevationSteps);
      Side side = rem < kElevationSteps ? Side::Left : Side::Right;
      int k = static_cast<int>(rem % kElevationSteps);
      const AgentRecord& r = pool.records_[i];
      grid = r.profile == profile && r.side == side &&
             std::abs(r.elevation_deg - elevation_at(k)) < 1e-3;
    }
    pool.grid_ = grid;
  }
  return pool;
}

} // namespace erupoint::body
