#include "splatprep/enhance.hpp"

#include <algorithm>
#include <cmath>

#include "splatprep/error.hpp"

namespace splatprep {

namespace {

__extension__ typedef unsigned __int128 u128;

double clamp01(double v) { return std::clamp(v, 0.0, 1.0); }

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  return s;
}

void require_image(const ImageBuffer& img, const char* op) {
  if (img.empty() || img.data.size() != img.sample_count()) {
    throw InputError(std::string(op) + ": empty or malformed image");
  }
}

}  // namespace

std::string_view stage_name(EnhanceStage stage) {
  switch (stage) {
    case EnhanceStage::kBrightness:
      return "brightness";
    case EnhanceStage::kContrast:
      return "contrast";
    case EnhanceStage::kSaturation:
      return "saturation";
    case EnhanceStage::kGamma:
      return "gamma";
  }
  return "unknown";
}

std::vector<EnhanceStage> parse_stage_order(std::string_view csv) {
  std::vector<EnhanceStage> order;
  std::size_t start = 0;
  while (start <= csv.size()) {
    auto end = csv.find(',', start);
    if (end == std::string_view::npos) end = csv.size();
    const std::string_view name = trim(csv.substr(start, end - start));
    if (name == "brightness") {
      order.push_back(EnhanceStage::kBrightness);
    } else if (name == "contrast") {
      order.push_back(EnhanceStage::kContrast);
    } else if (name == "saturation") {
      order.push_back(EnhanceStage::kSaturation);
    } else if (name == "gamma") {
      order.push_back(EnhanceStage::kGamma);
    } else {
      throw InputError("order: unknown stage '" + std::string(name) + "'");
    }
    start = end + 1;
  }
  EnhanceParams probe;
  probe.order = order;
  probe.validate();
  return order;
}

std::string format_stage_order(const std::vector<EnhanceStage>& order) {
  std::string out;
  for (std::size_t i = 0; i < order.size(); ++i) {
    if (i) out += ',';
    out += stage_name(order[i]);
  }
  return out;
}

std::vector<EnhanceStage> default_stage_order() {
  return {EnhanceStage::kBrightness, EnhanceStage::kContrast, EnhanceStage::kSaturation,
          EnhanceStage::kGamma};
}

std::vector<EnhanceStage> exposure_first_stage_order() {
  return {EnhanceStage::kBrightness, EnhanceStage::kGamma, EnhanceStage::kContrast,
          EnhanceStage::kSaturation};
}

void EnhanceParams::validate() const {
  if (!(beta >= -1.0 && beta <= 1.0)) {
    throw InputError("beta: must be in [-1, 1]");
  }
  if (!(alpha > 0.0) || !std::isfinite(alpha)) {
    throw InputError("alpha: must be > 0");
  }
  if (!(sat >= 0.0) || !std::isfinite(sat)) {
    throw InputError("sat: must be >= 0");
  }
  if (!(gamma > 0.0) || !std::isfinite(gamma)) {
    throw InputError("gamma: must be > 0");
  }
  std::array<int, 4> seen{};
  for (EnhanceStage s : order) ++seen[static_cast<std::size_t>(s)];
  if (order.size() != 4 || std::any_of(seen.begin(), seen.end(), [](int n) { return n != 1; })) {
    throw InputError("order: must list brightness, contrast, saturation and gamma once each");
  }
}

ImageBuffer apply_brightness(const ImageBuffer& img, double beta) {
  require_image(img, "brightness");
  ImageBuffer out = img;
  for (double& v : out.data) v = clamp01(v + beta);
  return out;
}

ImageBuffer apply_contrast(const ImageBuffer& img, double alpha) {
  require_image(img, "contrast");
  double sum = 0.0;
  for (double y : luminance(img)) sum += y;
  const double mu = sum / static_cast<double>(img.pixel_count());
  ImageBuffer out = img;
  // mu + alpha (v - mu), written as a delta so alpha == 1 is bit-exact.
  const double k = alpha - 1.0;
  for (double& v : out.data) v = clamp01(v + k * (v - mu));
  return out;
}

ImageBuffer apply_saturation(const ImageBuffer& img, double sat) {
  require_image(img, "saturation");
  ImageBuffer out = img;
  for (std::size_t i = 0; i < out.data.size(); i += 3) {
    const double y = luminance_of(img.data[i], img.data[i + 1], img.data[i + 2]);
    // Y + gain (C - Y) == C + (gain - 1) (C - Y); the latter is exact at sat == 1.
    const double extra = (sat - 1.0) * (1.0 - y);
    for (std::size_t c = 0; c < 3; ++c) {
      const double v = img.data[i + c];
      out.data[i + c] = clamp01(v + extra * (v - y));
    }
  }
  return out;
}

ImageBuffer apply_gamma(const ImageBuffer& img, double gamma) {
  if (!(gamma > 0.0) || !std::isfinite(gamma)) {
    throw InputError("gamma: must be > 0");
  }
  require_image(img, "gamma");
  ImageBuffer out = img;
  for (double& v : out.data) v = std::pow(clamp01(v), gamma);
  return out;
}

Histogram256 channel_histogram(const ImageBuffer& img, int channel) {
  Histogram256 h{};
  for (std::size_t i = static_cast<std::size_t>(channel); i < img.data.size(); i += 3) {
    ++h[quantize_u8(img.data[i])];
  }
  return h;
}

LevelMap histogram_level_map(const Histogram256& src, const Histogram256& ref) {
  std::array<uint64_t, 256> cum_src{};
  std::array<uint64_t, 256> cum_ref{};
  uint64_t n_src = 0;
  uint64_t n_ref = 0;
  for (int i = 0; i < 256; ++i) {
    n_src += src[static_cast<std::size_t>(i)];
    n_ref += ref[static_cast<std::size_t>(i)];
    cum_src[static_cast<std::size_t>(i)] = n_src;
    cum_ref[static_cast<std::size_t>(i)] = n_ref;
  }
  if (n_src == 0 || n_ref == 0) {
    throw InputError("histogram matching needs non-empty images");
  }

  // CDF_ref(u) >= CDF_src(v)  <=>  cum_ref[u] * n_src >= cum_src[v] * n_ref.
  // 128-bit products keep this exact for any pixel count.
  LevelMap map{};
  std::size_t u = 0;
  for (std::size_t v = 0; v < 256; ++v) {
    const u128 target = static_cast<u128>(cum_src[v]) * n_ref;
    while (u < 255 && static_cast<u128>(cum_ref[u]) * n_src < target) ++u;
    map[v] = static_cast<uint8_t>(u);
  }
  return map;
}

ImageBuffer histogram_match(const ImageBuffer& src, const ImageBuffer& ref) {
  require_image(src, "histogram_match");
  require_image(ref, "histogram_match reference");
  ImageBuffer out = src;
  for (int c = 0; c < 3; ++c) {
    const LevelMap map = histogram_level_map(channel_histogram(src, c), channel_histogram(ref, c));
    for (std::size_t i = static_cast<std::size_t>(c); i < out.data.size(); i += 3) {
      out.data[i] = static_cast<double>(map[quantize_u8(src.data[i])]) / 255.0;
    }
  }
  return out;
}

ImageBuffer apply_stage(const ImageBuffer& img, EnhanceStage stage, const EnhanceParams& params) {
  switch (stage) {
    case EnhanceStage::kBrightness:
      return apply_brightness(img, params.beta);
    case EnhanceStage::kContrast:
      return apply_contrast(img, params.alpha);
    case EnhanceStage::kSaturation:
      return apply_saturation(img, params.sat);
    case EnhanceStage::kGamma:
      return apply_gamma(img, params.gamma);
  }
  throw std::logic_error("unhandled enhance stage");
}

ImageBuffer enhance_pipeline(const ImageBuffer& img, const EnhanceParams& params,
                             const ImageBuffer* ref) {
  params.validate();
  ImageBuffer out = img;
  for (EnhanceStage stage : params.order) {
    out = apply_stage(out, stage, params);
  }
  if (ref != nullptr) {
    out = histogram_match(out, *ref);
  }
  return out;
}

}  // namespace splatprep
