#include "splatprep/imaging.hpp"

#include <algorithm>
#include <cmath>
#include <memory>

#include <png.h>

#include "splatprep/error.hpp"
#include "splatprep/file_util.hpp"

namespace splatprep {

namespace fs = std::filesystem;

static_assert(kLumaR + kLumaG + kLumaB == 1.0);

ImageBuffer::ImageBuffer(int w, int h, double fill) : width(w), height(h) {
  if (w <= 0 || h <= 0) {
    throw InputError("image dimensions must be positive");
  }
  data.assign(sample_count(), fill);
}

uint8_t quantize_u8(double v) {
  const double c = std::clamp(v, 0.0, 1.0);
  return static_cast<uint8_t>(std::round(c * 255.0));
}

ImageBuffer load_image(const fs::path& path) {
  const std::string bytes = read_file(path);

  png_image image{};
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_memory(&image, bytes.data(), bytes.size())) {
    throw InputError(path.string() + ": PNG decode failed: " + image.message);
  }
  auto guard = std::unique_ptr<png_image, void (*)(png_image*)>(&image, png_image_free);

  // The simplified API reports 16-bit sources through the linear flag.
  if (image.format & PNG_FORMAT_FLAG_LINEAR) {
    throw InputError(path.string() + ": unsupported bit depth (expected 8-bit PNG)");
  }
  if (image.width == 0 || image.height == 0 || image.width > (1u << 16) ||
      image.height > (1u << 16)) {
    throw InputError(path.string() + ": unsupported image size");
  }

  image.format = PNG_FORMAT_RGB;
  std::vector<png_byte> pixels(PNG_IMAGE_SIZE(image));
  if (!png_image_finish_read(&image, nullptr, pixels.data(), 0, nullptr)) {
    throw InputError(path.string() + ": PNG decode failed: " + image.message);
  }

  ImageBuffer out(static_cast<int>(image.width), static_cast<int>(image.height));
  for (std::size_t i = 0; i < out.data.size(); ++i) {
    out.data[i] = static_cast<double>(pixels[i]) / 255.0;
  }
  return out;
}

std::string encode_png(const ImageBuffer& img) {
  if (img.empty() || img.data.size() != img.sample_count()) {
    throw InputError("cannot encode an empty or malformed image");
  }
  std::vector<png_byte> pixels(img.data.size());
  std::transform(img.data.begin(), img.data.end(), pixels.begin(), quantize_u8);

  png_image image{};
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(img.width);
  image.height = static_cast<png_uint_32>(img.height);
  image.format = PNG_FORMAT_RGB;

  png_alloc_size_t size = 0;
  if (!png_image_write_to_memory(&image, nullptr, &size, 0, pixels.data(), 0, nullptr)) {
    throw std::runtime_error(std::string("PNG encode failed: ") + image.message);
  }
  std::string out(size, '\0');
  if (!png_image_write_to_memory(&image, out.data(), &size, 0, pixels.data(), 0, nullptr)) {
    throw std::runtime_error(std::string("PNG encode failed: ") + image.message);
  }
  out.resize(size);
  return out;
}

void save_image(const ImageBuffer& img, const fs::path& path) {
  write_file_atomic(path, encode_png(img));
}

std::vector<double> luminance(const ImageBuffer& img) {
  std::vector<double> y(img.pixel_count());
  for (std::size_t i = 0; i < y.size(); ++i) {
    y[i] = luminance_of(img.data[3 * i], img.data[3 * i + 1], img.data[3 * i + 2]);
  }
  return y;
}

std::vector<fs::path> list_png_files(const fs::path& dir) {
  std::error_code ec;
  if (!fs::is_directory(dir, ec)) {
    throw InputError(dir.string() + " is not a directory");
  }
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    std::string ext = entry.path().extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (ext == ".png") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end(),
            [](const fs::path& a, const fs::path& b) { return a.filename() < b.filename(); });
  return files;
}

}  // namespace splatprep
