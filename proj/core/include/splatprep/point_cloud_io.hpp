#pragma once

#include <filesystem>
#include <string>

#include "splatprep/geometry.hpp"

namespace splatprep {

/// ASCII PLY with `double x y z` and `uchar red green blue` vertex
/// properties; coordinates use the shortest round-trip decimal form.
std::string encode_ply_ascii(const PointCloud& cloud);
void write_ply_ascii(const PointCloud& cloud, const std::filesystem::path& path);

/// Reads ASCII PLY vertices. x, y, z are required; red, green, blue are
/// optional (mid-gray when absent); other scalar properties are skipped.
PointCloud read_ply_ascii(const std::filesystem::path& path);

}  // namespace splatprep
