#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "splatprep/imaging.hpp"

namespace splatprep {

enum class EnhanceStage { kBrightness, kContrast, kSaturation, kGamma };

std::string_view stage_name(EnhanceStage stage);
/// Parses "brightness,contrast,saturation,gamma" (any permutation, spaces
/// allowed around names). Throws InputError unless it is a permutation of all
/// four stages.
std::vector<EnhanceStage> parse_stage_order(std::string_view csv);
std::string format_stage_order(const std::vector<EnhanceStage>& order);

/// brightness -> contrast -> saturation -> gamma.
std::vector<EnhanceStage> default_stage_order();
/// brightness -> gamma -> contrast -> saturation, the alternative order where
/// the gamma curve directly follows the brightness lift.
std::vector<EnhanceStage> exposure_first_stage_order();

/// Photometric parameters. The defaults are the identity transform.
struct EnhanceParams {
  double beta = 0.0;   // brightness shift, [-1, 1]
  double alpha = 1.0;  // contrast gain, > 0
  double sat = 1.0;    // saturation gain, >= 0
  double gamma = 1.0;  // exponent, > 0; < 1 brightens
  std::vector<EnhanceStage> order = default_stage_order();
  std::optional<std::filesystem::path> reference;

  /// Throws InputError naming the offending field.
  void validate() const;
};

/// v <- clamp(v + beta, 0, 1).
ImageBuffer apply_brightness(const ImageBuffer& img, double beta);

/// v <- clamp(mu + alpha (v - mu), 0, 1), where mu is the image's mean
/// luminance (one scalar anchor for all channels).
ImageBuffer apply_contrast(const ImageBuffer& img, double alpha);

/// Per pixel, with Y its luminance:
///   gain = 1 + (sat - 1) (1 - Y)
///   C   <- clamp(Y + gain (C - Y), 0, 1)
/// Scaling the chrominance residuals C - Y by one factor keeps hue and
/// luminance; the (1 - Y) term fades the boost out toward highlights.
ImageBuffer apply_saturation(const ImageBuffer& img, double sat);

/// v <- v^gamma. Throws InputError for gamma <= 0.
ImageBuffer apply_gamma(const ImageBuffer& img, double gamma);

using Histogram256 = std::array<uint64_t, 256>;
using LevelMap = std::array<uint8_t, 256>;

/// Histogram of one channel after 8-bit quantization (quantize_u8).
Histogram256 channel_histogram(const ImageBuffer& img, int channel);

/// For each source level v: the smallest reference level u with
/// CDF_ref(u) >= CDF_src(v). Comparisons are done in exact integer
/// arithmetic. Monotone non-decreasing in v. Both histograms must be
/// non-empty.
LevelMap histogram_level_map(const Histogram256& src, const Histogram256& ref);

/// Per-channel histogram specification of `src` toward `ref`. Output samples
/// lie on the 256-level grid. Dimensions may differ.
ImageBuffer histogram_match(const ImageBuffer& src, const ImageBuffer& ref);

ImageBuffer apply_stage(const ImageBuffer& img, EnhanceStage stage, const EnhanceParams& params);

/// Applies the stages in params.order, then histogram_match against `ref`
/// when given. params.reference is not read here; callers resolve it.
ImageBuffer enhance_pipeline(const ImageBuffer& img, const EnhanceParams& params,
                             const ImageBuffer* ref = nullptr);

}  // namespace splatprep
