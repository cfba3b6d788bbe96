#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace splatprep {

// Rec. 709 luma weights; they sum to exactly 1.0 in binary64.
inline constexpr double kLumaR = 0.2126;
inline constexpr double kLumaG = 0.7152;
inline constexpr double kLumaB = 0.0722;

/// Interleaved RGB image, row-major, samples in [0, 1]. Values keep the
/// source's nonlinear sRGB encoding; no linearization happens anywhere.
struct ImageBuffer {
  int width = 0;
  int height = 0;
  std::vector<double> data;

  ImageBuffer() = default;
  ImageBuffer(int w, int h, double fill = 0.0);

  std::size_t pixel_count() const {
    return static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
  }
  std::size_t sample_count() const { return pixel_count() * 3; }
  bool empty() const { return width <= 0 || height <= 0; }

  double& at(int x, int y, int c) {
    return data[(static_cast<std::size_t>(y) * static_cast<std::size_t>(width) +
                 static_cast<std::size_t>(x)) * 3 + static_cast<std::size_t>(c)];
  }
  double at(int x, int y, int c) const {
    return data[(static_cast<std::size_t>(y) * static_cast<std::size_t>(width) +
                 static_cast<std::size_t>(x)) * 3 + static_cast<std::size_t>(c)];
  }

  bool operator==(const ImageBuffer&) const = default;
};

/// Quantizes a sample to 8 bits: clamp to [0, 1], scale by 255, round half
/// away from zero.
uint8_t quantize_u8(double v);

/// Loads an 8-bit PNG (gray, gray+alpha, RGB, RGBA or palette; alpha is
/// dropped). Throws InputError for 16-bit PNGs and decode failures.
ImageBuffer load_image(const std::filesystem::path& path);

/// Encodes to an 8-bit RGB PNG in memory.
std::string encode_png(const ImageBuffer& img);

/// Writes an 8-bit RGB PNG atomically.
void save_image(const ImageBuffer& img, const std::filesystem::path& path);

/// Per-pixel Rec. 709 luminance, row-major.
std::vector<double> luminance(const ImageBuffer& img);

/// Y = 0.2126 R + 0.7152 G + 0.0722 B, evaluated as G + wR (R - G) + wB (B - G)
/// so that gray pixels map to exactly their channel value.
inline double luminance_of(double r, double g, double b) {
  return g + kLumaR * (r - g) + kLumaB * (b - g);
}

/// Lists `*.png` files (case-insensitive extension) directly inside `dir`,
/// sorted by file name.
std::vector<std::filesystem::path> list_png_files(const std::filesystem::path& dir);

}  // namespace splatprep
