// Copyright (C) 2026 erupoint contributors
// SPDX-License-Identifier: Apache-2.0
#include "erupoint/io.hpp"

#include <algorithm>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <vector>

#include "erupoint/error.hpp"

namespace erupoint::geom {

namespace {

uint8_t to_u8(double c) {
  double v = std::clamp(c, 0.0, 1.0) * 255.0;
  return static_cast<uint8_t>(std::lround(v));
}

void write_f32(std::ostream& os, float v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(v));
}

void write_u32(std::ostream& os, uint32_t v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(v));
}

float read_f32(std::istream& is) {
  float v;
  is.read(reinterpret_cast<char*>(&v), sizeof(v));
  if (!is) throw IoError("erupc: truncated float payload");
  return v;
}

uint32_t read_u32(std::istream& is) {
  uint32_t v;
  is.read(reinterpret_cast<char*>(&v), sizeof(v));
  if (!is) throw IoError("erupc: truncated header");
  return v;
}

Vec3 read_vec3_f32(std::istream& is) {
  float x = read_f32(is), y = read_f32(is), z = read_f32(is);
  return {x, y, z};
}

void write_vec3_f32(std::ostream& os, const Vec3& v) {
  write_f32(os, static_cast<float>(v.x));
  write_f32(os, static_cast<float>(v.y));
  write_f32(os, static_cast<float>(v.z));
}

} // namespace

void write_ply(const PointCloud& pc, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw IoError("cannot open for writing: " + path);

  os << "ply\nformat ascii 1.0\n";
  os << "element vertex " << pc.size() << "\n";
  os << "property float x\nproperty float y\nproperty float z\n";
  if (pc.has_colors()) {
    os << "property uchar red\nproperty uchar green\nproperty uchar blue\n";
  }
  if (pc.has_normals()) {
    os << "property float nx\nproperty float ny\nproperty float nz\n";
  }
  os << "end_header\n";

  char buf[256];
  for (size_t i = 0; i < pc.size(); ++i) {
    const Vec3& p = pc.points[i];
    int n = std::snprintf(buf, sizeof(buf), "%.9g %.9g %.9g", p.x, p.y, p.z);
    os.write(buf, n);
    if (pc.has_colors()) {
      const Vec3& c = pc.colors[i];
      n = std::snprintf(buf, sizeof(buf), " %u %u %u", to_u8(c.x), to_u8(c.y),
                        to_u8(c.z));
      os.write(buf, n);
    }
    if (pc.has_normals()) {
      const Vec3& m = pc.normals[i];
      n = std::snprintf(buf, sizeof(buf), " %.9g %.9g %.9g", m.x, m.y, m.z);
      os.write(buf, n);
    }
    os.put('\n');
  }
  if (!os) throw IoError("write failed: " + path);
}

PointCloud read_ply(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open: " + path);

  std::string line;
  if (!std::getline(is, line) || line.rfind("ply", 0) != 0) {
    throw IoError("not a PLY file: " + path);
  }

  size_t vertex_count = 0;
  std::vector<std::string> props;
  bool ascii = false;
  std::string element;
  size_t line_no = 1;
  while (std::getline(is, line)) {
    ++line_no;
    std::istringstream ss(line);
    std::string tok;
    ss >> tok;
    if (tok == "format") {
      std::string fmt;
      ss >> fmt;
      ascii = (fmt == "ascii");
    } else if (tok == "comment") {
      continue;
    } else if (tok == "element") {
      std::string name;
      size_t count;
      ss >> name >> count;
      element = name;
      if (name == "vertex") vertex_count = count;
    } else if (tok == "property") {
      if (element != "vertex") continue;
      std::string type, name;
      ss >> type;
      if (type == "list") {
        throw IoError("PLY list properties on vertices are unsupported");
      }
      ss >> name;
      props.push_back(name);
    } else if (tok == "end_header") {
      break;
    }
  }
  if (!ascii) throw IoError("only ASCII PLY is supported: " + path);

  auto index_of = [&](const char* name) -> int {
    auto it = std::find(props.begin(), props.end(), name);
    return it == props.end() ? -1
                             : static_cast<int>(it - props.begin());
  };
  int px = index_of("x"), py = index_of("y"), pz = index_of("z");
  int pr = index_of("red"), pg = index_of("green"), pb = index_of("blue");
  int pnx = index_of("nx"), pny = index_of("ny"), pnz = index_of("nz");
  if (px < 0 || py < 0 || pz < 0) {
    throw IoError("PLY vertex element lacks x/y/z: " + path);
  }
  bool has_rgb = pr >= 0 && pg >= 0 && pb >= 0;
  bool has_n = pnx >= 0 && pny >= 0 && pnz >= 0;

  PointCloud pc;
  pc.points.reserve(vertex_count);
  std::vector<double> vals(props.size());
  for (size_t i = 0; i < vertex_count; ++i) {
    if (!std::getline(is, line)) {
      throw ParseError("PLY: unexpected end of vertex data", line_no);
    }
    ++line_no;
    std::istringstream ss(line);
    for (size_t k = 0; k < props.size(); ++k) {
      if (!(ss >> vals[k])) {
        throw ParseError("PLY: malformed vertex line", line_no);
      }
    }
    pc.points.push_back({vals[px], vals[py], vals[pz]});
    if (has_rgb) {
      pc.colors.push_back(
          {vals[pr] / 255.0, vals[pg] / 255.0, vals[pb] / 255.0});
    }
    if (has_n) pc.normals.push_back({vals[pnx], vals[pny], vals[pnz]});
  }
  return pc;
}

static const char kErupcMagic[6] = {'E', 'R', 'U', 'P', 'C', '\0'};

void write_erupc(const PointCloud& pc, std::ostream& os) {
  os.write(kErupcMagic, sizeof(kErupcMagic));
  write_u32(os, static_cast<uint32_t>(pc.size()));
  for (const Vec3& p : pc.points) write_vec3_f32(os, p);
  os.put(pc.has_colors() ? 1 : 0);
  for (const Vec3& c : pc.colors) write_vec3_f32(os, c);
  os.put(pc.has_normals() ? 1 : 0);
  for (const Vec3& n : pc.normals) write_vec3_f32(os, n);
  if (!os) throw IoError("erupc: write failed");
}

PointCloud read_erupc(std::istream& is) {
  char magic[6];
  is.read(magic, sizeof(magic));
  if (!is || std::memcmp(magic, kErupcMagic, sizeof(magic)) != 0) {
    throw IoError("erupc: bad magic");
  }
  uint32_t count = read_u32(is);
  PointCloud pc;
  pc.points.reserve(count);
  for (uint32_t i = 0; i < count; ++i) pc.points.push_back(read_vec3_f32(is));
  int flag = is.get();
  if (flag == EOF) throw IoError("erupc: truncated color flag");
  if (flag) {
    pc.colors.reserve(count);
    for (uint32_t i = 0; i < count; ++i) pc.colors.push_back(read_vec3_f32(is));
  }
  flag = is.get();
  if (flag == EOF) throw IoError("erupc: truncated normal flag");
  if (flag) {
    pc.normals.reserve(count);
    for (uint32_t i = 0; i < count; ++i) pc.normals.push_back(read_vec3_f32(is));
  }
  return pc;
}

void skip_erupc(std::istream& is) {
  char magic[6];
  is.read(magic, sizeof(magic));
  if (!is || std::memcmp(magic, kErupcMagic, sizeof(magic)) != 0) {
    throw IoError("erupc: bad magic");
  }
  uint32_t count = read_u32(is);
  auto skip = [&](size_t bytes) {
    is.seekg(static_cast<std::streamoff>(bytes), std::ios::cur);
    if (!is) throw IoError("erupc: truncated block");
  };
  skip(count * 12u);
  int flag = is.get();
  if (flag == EOF) throw IoError("erupc: truncated color flag");
  if (flag) skip(count * 12u);
  flag = is.get();
  if (flag == EOF) throw IoError("erupc: truncated normal flag");
  if (flag) skip(count * 12u);
}

void write_erupc_file(const PointCloud& pc, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open for writing: " + path);
  write_erupc(pc, os);
}

PointCloud read_erupc_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open: " + path);
  return read_erupc(is);
}

} // namespace erupoint::geom
