// Copyright (C) 2026 erupoint contributors
// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "erupoint/error.hpp"
#include "erupoint/io.hpp"
#include "testutil.hpp"

using namespace erupoint;
using namespace erupoint::geom;

namespace {

std::string temp_path(const char* name) {
  return (std::filesystem::temp_directory_path() / name).string();
}

void check_close_f32(const PointCloud& a, const PointCloud& b, double tol) {
  REQUIRE(a.size() == b.size());
  REQUIRE(a.has_colors() == b.has_colors());
  REQUIRE(a.has_normals() == b.has_normals());
  for (size_t i = 0; i < a.size(); ++i) {
    CHECK((a.points[i] - b.points[i]).norm() < tol);
    if (a.has_normals()) CHECK((a.normals[i] - b.normals[i]).norm() < tol);
  }
}

} // namespace

TEST_SUITE_BEGIN("io");

TEST_CASE("ply round trip with colors and normals") {
  Rng rng(21);
  PointCloud pc = testutil::random_cloud(rng, 257, true, true);
  std::string path = temp_path("erupoint_test.ply");
  write_ply(pc, path);
  PointCloud back = read_ply(path);
  check_close_f32(pc, back, 1e-6);
  for (size_t i = 0; i < pc.size(); ++i) {
    // uchar quantization on disk
    CHECK((pc.colors[i] - back.colors[i]).norm() < 3.0 / 255.0);
  }
  std::remove(path.c_str());
}

TEST_CASE("ply positions-only round trip") {
  Rng rng(22);
  PointCloud pc = testutil::random_cloud(rng, 31, false, false);
  std::string path = temp_path("erupoint_plain.ply");
  write_ply(pc, path);
  PointCloud back = read_ply(path);
  CHECK_FALSE(back.has_colors());
  CHECK_FALSE(back.has_normals());
  check_close_f32(pc, back, 1e-6);
  std::remove(path.c_str());
}

TEST_CASE("ply rejects garbage") {
  std::string path = temp_path("erupoint_bad.ply");
  {
    std::ofstream os(path);
    os << "ply\nformat ascii 1.0\nelement vertex 2\nproperty float x\n"
          "property float y\nproperty float z\nend_header\n0 0 0\n";
  }
  CHECK_THROWS_AS(read_ply(path), ParseError);
  std::remove(path.c_str());
  CHECK_THROWS_AS(read_ply(temp_path("missing_file.ply")), IoError);
}

TEST_CASE("erupc block round trip preserves the f32 payload bit-for-bit") {
  Rng rng(23);
  PointCloud pc = testutil::random_cloud(rng, 100, false, true);
  std::stringstream ss;
  write_erupc(pc, ss);
  std::string once = ss.str();
  PointCloud back = read_erupc(ss);
  std::stringstream ss2;
  write_erupc(back, ss2);
  CHECK(once == ss2.str());
  check_close_f32(pc, back, 1e-6);
}

TEST_CASE("erupc skip lands on the next block") {
  Rng rng(24);
  PointCloud a = testutil::random_cloud(rng, 10, true, false);
  PointCloud b = testutil::random_cloud(rng, 7, false, true);
  std::stringstream ss;
  write_erupc(a, ss);
  write_erupc(b, ss);
  skip_erupc(ss);
  PointCloud back = read_erupc(ss);
  CHECK(back.size() == 7);
  CHECK(back.has_normals());
  check_close_f32(b, back, 1e-6);
}

TEST_CASE("erupc rejects a bad magic") {
  std::stringstream ss("NOTPC");
  CHECK_THROWS_AS(read_erupc(ss), IoError);
}

TEST_SUITE_END();
