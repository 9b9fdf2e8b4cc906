// Copyright (C) 2026 erupoint contributors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <iosfwd>
#include <string>

#include "erupoint/geom.hpp"

namespace erupoint::geom {

// ASCII PLY, vertex element with x,y,z [,red,green,blue][,nx,ny,nz].
// Colors are uchar 0..255 on disk, [0,1] in memory; absent feature channels
// are omitted from the header.
void write_ply(const PointCloud& pc, const std::string& path);
PointCloud read_ply(const std::string& path);

// Toolkit binary cloud block: magic "ERUPC\0", little-endian, u32 count,
// f32 position triples, then a presence-flagged block each for colors and
// normals (u8 flag, f32 triples when set).
void write_erupc(const PointCloud& pc, std::ostream& os);
PointCloud read_erupc(std::istream& is);
// Advances past one block without materializing it.
void skip_erupc(std::istream& is);
void write_erupc_file(const PointCloud& pc, const std::string& path);
PointCloud read_erupc_file(const std::string& path);

} // namespace erupoint::geom
