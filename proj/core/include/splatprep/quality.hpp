#pragma once

#include <filesystem>
#include <limits>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "splatprep/imaging.hpp"

namespace splatprep {

/// 10 log10(1 / MSE) over all H*W*3 samples; +infinity when the images are
/// identical. Throws InputError on a size mismatch.
double psnr(const ImageBuffer& a, const ImageBuffer& b);

inline constexpr int kSsimWindow = 11;
inline constexpr double kSsimSigma = 1.5;
inline constexpr double kSsimC1 = 0.01 * 0.01;  // (K1 L)^2, L = 1
inline constexpr double kSsimC2 = 0.03 * 0.03;  // (K2 L)^2

/// Normalized 1-D Gaussian taps; the 2-D window is their outer product.
std::vector<double> gaussian_taps(int size = kSsimWindow, double sigma = kSsimSigma);

/// Mean SSIM with an 11x11 Gaussian window (sigma 1.5), computed per channel
/// over "valid" window positions only (no padding), then averaged across
/// channels. Throws InputError on a size mismatch or a side shorter than 11.
double ssim(const ImageBuffer& a, const ImageBuffer& b);

struct ImageScore {
  std::string name;
  double psnr = 0.0;  // may be +infinity
  double ssim = 0.0;

  bool operator==(const ImageScore&) const = default;
};

/// Per-image scores and their aggregates. Infinite PSNRs (identical pairs)
/// are left out of mean_psnr and counted in infinite_psnr_count; if every
/// PSNR is infinite, mean_psnr is +infinity.
struct MetricReport {
  std::vector<ImageScore> images;  // sorted by name
  double mean_psnr = 0.0;
  double mean_ssim = 0.0;
  std::size_t infinite_psnr_count = 0;

  std::size_t count() const { return images.size(); }

  /// Sorts rows by name and computes the aggregates. Throws InputError on
  /// an empty row set or duplicate names.
  static MetricReport from_scores(std::vector<ImageScore> scores);

  bool operator==(const MetricReport&) const = default;
};

/// Scores every PNG in `pred` against the file with the same name in `gt`.
/// Throws InputError if a ground-truth file is missing or `pred` has no PNGs.
MetricReport evaluate_dir(const std::filesystem::path& pred, const std::filesystem::path& gt,
                          unsigned threads = 1);

enum class SelectionCriterion { kPsnr, kSsim };

SelectionCriterion parse_selection_criterion(std::string_view name);
std::string_view selection_criterion_name(SelectionCriterion criterion);

struct SelectionResult {
  std::string chosen;
  SelectionCriterion criterion = SelectionCriterion::kPsnr;
  /// Set when the choice came from a manual override rather than metrics.
  bool overridden = false;
  std::map<std::string, MetricReport> reports;
};

/// Picks the branch with the highest mean of `criterion`; ties go to the
/// higher mean of the other metric, then to the lexicographically smallest
/// label. Throws InputError on an empty map.
SelectionResult select_branch(const std::map<std::string, MetricReport>& reports,
                              SelectionCriterion criterion);

/// Report JSON (schema "splatprep.metrics/1"). Infinite PSNR is written as
/// null with "psnr_infinite": true.
nlohmann::json report_to_json(const MetricReport& report);
MetricReport report_from_json(const nlohmann::json& j);

/// Selection JSON (schema "splatprep.selection/1").
nlohmann::json selection_to_json(const SelectionResult& result);

}  // namespace splatprep
