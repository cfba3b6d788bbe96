#include "splatprep/depth_io.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <memory>

#include <png.h>

#include "splatprep/error.hpp"
#include "splatprep/file_util.hpp"

namespace splatprep {

namespace fs = std::filesystem;

namespace {

bool is_space(char c) { return c == ' ' || c == '\n' || c == '\r' || c == '\t'; }

// Reads one whitespace-delimited header token starting at `pos`.
std::string_view header_token(std::string_view bytes, std::size_t& pos, const std::string& name) {
  while (pos < bytes.size() && is_space(bytes[pos])) ++pos;
  const std::size_t start = pos;
  while (pos < bytes.size() && !is_space(bytes[pos])) ++pos;
  if (start == pos) {
    throw InputError(name + ": truncated PFM header");
  }
  return bytes.substr(start, pos - start);
}

template <typename T>
T parse_number(std::string_view tok, const std::string& name) {
  T v{};
  const auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (res.ec != std::errc() || res.ptr != tok.data() + tok.size()) {
    throw InputError(name + ": bad PFM header value '" + std::string(tok) + "'");
  }
  return v;
}

}  // namespace

DepthMap decode_pfm(std::string_view bytes, const std::string& name) {
  std::size_t pos = 0;
  const std::string_view magic = header_token(bytes, pos, name);
  int channels = 0;
  if (magic == "Pf") {
    channels = 1;
  } else if (magic == "PF") {
    channels = 3;
  } else {
    throw InputError(name + ": not a PFM file");
  }
  const int width = parse_number<int>(header_token(bytes, pos, name), name);
  const int height = parse_number<int>(header_token(bytes, pos, name), name);
  const double scale = parse_number<double>(header_token(bytes, pos, name), name);
  if (width <= 0 || height <= 0 || width > (1 << 16) || height > (1 << 16)) {
    throw InputError(name + ": unsupported PFM size");
  }
  if (scale == 0.0 || !std::isfinite(scale)) {
    throw InputError(name + ": PFM scale must be non-zero");
  }
  // Exactly one whitespace byte separates the header from the raster.
  if (pos >= bytes.size() || !is_space(bytes[pos])) {
    throw InputError(name + ": truncated PFM header");
  }
  ++pos;

  const bool little = scale < 0.0;
  const std::size_t count = static_cast<std::size_t>(width) * static_cast<std::size_t>(height) *
                            static_cast<std::size_t>(channels);
  if (bytes.size() - pos < count * 4) {
    throw InputError(name + ": truncated PFM raster");
  }

  DepthMap out(width, height);
  const auto* raw = reinterpret_cast<const unsigned char*>(bytes.data() + pos);
  for (int row = 0; row < height; ++row) {
    const int v = height - 1 - row;  // bottom-up on disk
    for (int u = 0; u < width; ++u) {
      const std::size_t off =
          ((static_cast<std::size_t>(row) * static_cast<std::size_t>(width) +
            static_cast<std::size_t>(u)) *
           static_cast<std::size_t>(channels)) *
          4;
      uint32_t bits = 0;
      for (int b = 0; b < 4; ++b) {
        const uint32_t byte = raw[off + static_cast<std::size_t>(b)];
        bits |= little ? byte << (8 * b) : byte << (8 * (3 - b));
      }
      const float d = std::bit_cast<float>(bits);
      out.at(u, v) = DepthMap::is_valid(d) ? d : 0.0f;
    }
  }
  return out;
}

DepthMap read_pfm(const fs::path& path) { return decode_pfm(read_file(path), path.string()); }

std::string encode_pfm(const DepthMap& depth) {
  std::string out = "Pf\n" + std::to_string(depth.width) + " " + std::to_string(depth.height) +
                    "\n-1\n";
  out.reserve(out.size() + depth.depth.size() * 4);
  for (int row = 0; row < depth.height; ++row) {
    const int v = depth.height - 1 - row;
    for (int u = 0; u < depth.width; ++u) {
      const uint32_t bits = std::bit_cast<uint32_t>(depth.at(u, v));
      for (int b = 0; b < 4; ++b) {
        out.push_back(static_cast<char>((bits >> (8 * b)) & 0xFFu));
      }
    }
  }
  return out;
}

void write_pfm(const DepthMap& depth, const fs::path& path) {
  write_file_atomic(path, encode_pfm(depth));
}

DepthMap read_depth_png16(const fs::path& path, double scale) {
  if (!(scale > 0.0) || !std::isfinite(scale)) {
    throw InputError("depth scale must be positive (required for 16-bit PNG depth)");
  }
  const std::string bytes = read_file(path);
  png_image image{};
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_memory(&image, bytes.data(), bytes.size())) {
    throw InputError(path.string() + ": PNG decode failed: " + image.message);
  }
  auto guard = std::unique_ptr<png_image, void (*)(png_image*)>(&image, png_image_free);
  if (!(image.format & PNG_FORMAT_FLAG_LINEAR)) {
    throw InputError(path.string() + ": depth PNG must be 16-bit");
  }
  if (image.format & (PNG_FORMAT_FLAG_COLOR | PNG_FORMAT_FLAG_ALPHA)) {
    throw InputError(path.string() + ": depth PNG must be single-channel grayscale");
  }
  if (image.width == 0 || image.height == 0 || image.width > (1u << 16) ||
      image.height > (1u << 16)) {
    throw InputError(path.string() + ": unsupported image size");
  }
  image.format = PNG_FORMAT_LINEAR_Y;
  std::vector<png_uint_16> raw(PNG_IMAGE_SIZE(image) / sizeof(png_uint_16));
  if (!png_image_finish_read(&image, nullptr, raw.data(), 0, nullptr)) {
    throw InputError(path.string() + ": PNG decode failed: " + image.message);
  }
  DepthMap out(static_cast<int>(image.width), static_cast<int>(image.height));
  for (std::size_t i = 0; i < raw.size(); ++i) {
    out.depth[i] = raw[i] == 0 ? 0.0f : static_cast<float>(raw[i] * scale);
  }
  return out;
}

void write_depth_png16(const DepthMap& depth, double scale, const fs::path& path) {
  if (!(scale > 0.0) || !std::isfinite(scale)) {
    throw InputError("depth scale must be positive");
  }
  std::vector<png_uint_16> raw(depth.depth.size());
  for (std::size_t i = 0; i < raw.size(); ++i) {
    const float d = depth.depth[i];
    const double q = DepthMap::is_valid(d) ? std::round(d / scale) : 0.0;
    raw[i] = static_cast<png_uint_16>(std::clamp(q, 0.0, 65535.0));
  }
  png_image image{};
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(depth.width);
  image.height = static_cast<png_uint_32>(depth.height);
  image.format = PNG_FORMAT_LINEAR_Y;
  png_alloc_size_t size = 0;
  if (!png_image_write_to_memory(&image, nullptr, &size, 0, raw.data(), 0, nullptr)) {
    throw std::runtime_error(std::string("PNG encode failed: ") + image.message);
  }
  std::string out(size, '\0');
  if (!png_image_write_to_memory(&image, out.data(), &size, 0, raw.data(), 0, nullptr)) {
    throw std::runtime_error(std::string("PNG encode failed: ") + image.message);
  }
  out.resize(size);
  write_file_atomic(path, out);
}

}  // namespace splatprep
