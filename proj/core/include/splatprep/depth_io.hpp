#pragma once

#include <filesystem>
#include <string>

#include "splatprep/geometry.hpp"

namespace splatprep {

/// Reads a portable float map. "Pf" (one channel) and "PF" (three channels,
/// first one used) are accepted; a negative scale means little-endian, a
/// positive one big-endian. Rows are stored bottom-up on disk and returned
/// top-down. Non-finite and negative samples are stored as 0 (invalid).
DepthMap read_pfm(const std::filesystem::path& path);
DepthMap decode_pfm(std::string_view bytes, const std::string& name = "<pfm>");

/// Writes a little-endian "Pf" file atomically.
void write_pfm(const DepthMap& depth, const std::filesystem::path& path);
std::string encode_pfm(const DepthMap& depth);

/// Reads a 16-bit grayscale PNG; depth = value * scale, value 0 = invalid.
/// Throws InputError for 8-bit, color or alpha PNGs and for scale <= 0.
DepthMap read_depth_png16(const std::filesystem::path& path, double scale);

/// Stores round(depth / scale) clamped to [0, 65535]; invalid samples as 0.
void write_depth_png16(const DepthMap& depth, double scale, const std::filesystem::path& path);

}  // namespace splatprep
