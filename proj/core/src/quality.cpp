#include "splatprep/quality.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <thread>

#include <nlohmann/json.hpp>

#include "splatprep/error.hpp"

namespace splatprep {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

void require_same_size(const ImageBuffer& a, const ImageBuffer& b, const char* op) {
  if (a.empty() || b.empty() || a.data.size() != a.sample_count() ||
      b.data.size() != b.sample_count()) {
    throw InputError(std::string(op) + ": empty or malformed image");
  }
  if (a.width != b.width || a.height != b.height) {
    throw InputError(std::string(op) + ": size mismatch (" + std::to_string(a.width) + "x" +
                     std::to_string(a.height) + " vs " + std::to_string(b.width) + "x" +
                     std::to_string(b.height) + ")");
  }
}

// Valid-mode separable filtering of one plane with the given taps.
std::vector<double> filter_valid(const std::vector<double>& plane, int w, int h,
                                 const std::vector<double>& taps) {
  const int n = static_cast<int>(taps.size());
  const int ow = w - n + 1;
  const int oh = h - n + 1;
  std::vector<double> horiz(static_cast<std::size_t>(ow) * static_cast<std::size_t>(h));
  for (int y = 0; y < h; ++y) {
    const double* row = plane.data() + static_cast<std::size_t>(y) * static_cast<std::size_t>(w);
    double* out = horiz.data() + static_cast<std::size_t>(y) * static_cast<std::size_t>(ow);
    for (int x = 0; x < ow; ++x) {
      double s = 0.0;
      for (int k = 0; k < n; ++k) s += taps[static_cast<std::size_t>(k)] * row[x + k];
      out[x] = s;
    }
  }
  std::vector<double> result(static_cast<std::size_t>(ow) * static_cast<std::size_t>(oh));
  for (int y = 0; y < oh; ++y) {
    double* out = result.data() + static_cast<std::size_t>(y) * static_cast<std::size_t>(ow);
    for (int x = 0; x < ow; ++x) {
      double s = 0.0;
      for (int k = 0; k < n; ++k) {
        s += taps[static_cast<std::size_t>(k)] *
             horiz[static_cast<std::size_t>(y + k) * static_cast<std::size_t>(ow) +
                   static_cast<std::size_t>(x)];
      }
      out[x] = s;
    }
  }
  return result;
}

double ssim_channel(const ImageBuffer& a, const ImageBuffer& b, int c,
                    const std::vector<double>& taps) {
  const std::size_t n = a.pixel_count();
  std::vector<double> x(n), y(n), xx(n), yy(n), xy(n);
  for (std::size_t i = 0; i < n; ++i) {
    x[i] = a.data[3 * i + static_cast<std::size_t>(c)];
    y[i] = b.data[3 * i + static_cast<std::size_t>(c)];
    xx[i] = x[i] * x[i];
    yy[i] = y[i] * y[i];
    xy[i] = x[i] * y[i];
  }
  const int w = a.width;
  const int h = a.height;
  const auto mu_x = filter_valid(x, w, h, taps);
  const auto mu_y = filter_valid(y, w, h, taps);
  const auto e_xx = filter_valid(xx, w, h, taps);
  const auto e_yy = filter_valid(yy, w, h, taps);
  const auto e_xy = filter_valid(xy, w, h, taps);

  double sum = 0.0;
  for (std::size_t i = 0; i < mu_x.size(); ++i) {
    const double mx = mu_x[i];
    const double my = mu_y[i];
    const double mxx = mx * mx;
    const double myy = my * my;
    const double mxy = mx * my;
    const double var_x = e_xx[i] - mxx;
    const double var_y = e_yy[i] - myy;
    const double cov = e_xy[i] - mxy;
    const double num = (2.0 * mxy + kSsimC1) * (2.0 * cov + kSsimC2);
    const double den = (mxx + myy + kSsimC1) * (var_x + var_y + kSsimC2);
    sum += num / den;
  }
  return sum / static_cast<double>(mu_x.size());
}

ImageScore score_pair(const fs::path& pred, const fs::path& gt) {
  const ImageBuffer a = load_image(pred);
  const ImageBuffer b = load_image(gt);
  ImageScore s;
  s.name = pred.filename().string();
  try {
    s.psnr = psnr(a, b);
    s.ssim = ssim(a, b);
  } catch (const InputError& e) {
    throw InputError(s.name + ": " + e.what());
  }
  return s;
}

double criterion_value(const MetricReport& r, SelectionCriterion c) {
  return c == SelectionCriterion::kPsnr ? r.mean_psnr : r.mean_ssim;
}

json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

}  // namespace

double psnr(const ImageBuffer& a, const ImageBuffer& b) {
  require_same_size(a, b, "psnr");
  double sum = 0.0;
  for (std::size_t i = 0; i < a.data.size(); ++i) {
    const double d = a.data[i] - b.data[i];
    sum += d * d;
  }
  const double mse = sum / static_cast<double>(a.data.size());
  if (mse == 0.0) {
    return std::numeric_limits<double>::infinity();
  }
  return 10.0 * std::log10(1.0 / mse);
}

std::vector<double> gaussian_taps(int size, double sigma) {
  if (size < 1 || !(sigma > 0.0)) {
    throw InputError("gaussian_taps: size must be >= 1 and sigma > 0");
  }
  std::vector<double> taps(static_cast<std::size_t>(size));
  const double center = 0.5 * (size - 1);
  double total = 0.0;
  for (int i = 0; i < size; ++i) {
    const double d = i - center;
    taps[static_cast<std::size_t>(i)] = std::exp(-(d * d) / (2.0 * sigma * sigma));
    total += taps[static_cast<std::size_t>(i)];
  }
  for (double& t : taps) t /= total;
  return taps;
}

double ssim(const ImageBuffer& a, const ImageBuffer& b) {
  require_same_size(a, b, "ssim");
  if (a.width < kSsimWindow || a.height < kSsimWindow) {
    throw InputError("ssim: image smaller than the 11x11 window");
  }
  const std::vector<double> taps = gaussian_taps();
  double total = 0.0;
  for (int c = 0; c < 3; ++c) total += ssim_channel(a, b, c, taps);
  return total / 3.0;
}

MetricReport MetricReport::from_scores(std::vector<ImageScore> scores) {
  if (scores.empty()) {
    throw InputError("metric report needs at least one image");
  }
  std::sort(scores.begin(), scores.end(),
            [](const ImageScore& x, const ImageScore& y) { return x.name < y.name; });
  for (std::size_t i = 1; i < scores.size(); ++i) {
    if (scores[i].name == scores[i - 1].name) {
      throw InputError("metric report: duplicate image '" + scores[i].name + "'");
    }
  }
  MetricReport r;
  double psnr_sum = 0.0;
  double ssim_sum = 0.0;
  std::size_t finite = 0;
  for (const auto& s : scores) {
    if (std::isinf(s.psnr) && s.psnr > 0) {
      ++r.infinite_psnr_count;
    } else {
      psnr_sum += s.psnr;
      ++finite;
    }
    ssim_sum += s.ssim;
  }
  r.mean_psnr = finite > 0 ? psnr_sum / static_cast<double>(finite)
                           : std::numeric_limits<double>::infinity();
  r.mean_ssim = ssim_sum / static_cast<double>(scores.size());
  r.images = std::move(scores);
  return r;
}

MetricReport evaluate_dir(const fs::path& pred, const fs::path& gt, unsigned threads) {
  const std::vector<fs::path> files = list_png_files(pred);
  if (files.empty()) {
    throw InputError("no PNG images in " + pred.string());
  }
  std::error_code ec;
  if (!fs::is_directory(gt, ec)) {
    throw InputError(gt.string() + " is not a directory");
  }
  for (const auto& f : files) {
    if (!fs::is_regular_file(gt / f.filename(), ec)) {
      throw InputError("missing ground truth for " + f.filename().string() + " in " +
                       gt.string());
    }
  }

  std::vector<ImageScore> scores(files.size());
  const std::size_t workers = std::clamp<std::size_t>(threads, 1, files.size());
  if (workers == 1) {
    for (std::size_t i = 0; i < files.size(); ++i) {
      scores[i] = score_pair(files[i], gt / files[i].filename());
    }
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::exception_ptr> errors(workers);
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        try {
          for (std::size_t i = next++; i < files.size(); i = next++) {
            scores[i] = score_pair(files[i], gt / files[i].filename());
          }
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    }
    for (auto& t : pool) t.join();
    for (const auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
  }
  return MetricReport::from_scores(std::move(scores));
}

SelectionCriterion parse_selection_criterion(std::string_view name) {
  if (name == "psnr") return SelectionCriterion::kPsnr;
  if (name == "ssim") return SelectionCriterion::kSsim;
  throw InputError("unknown selection criterion '" + std::string(name) +
                   "' (expected psnr or ssim)");
}

std::string_view selection_criterion_name(SelectionCriterion criterion) {
  return criterion == SelectionCriterion::kPsnr ? "psnr" : "ssim";
}

SelectionResult select_branch(const std::map<std::string, MetricReport>& reports,
                              SelectionCriterion criterion) {
  if (reports.empty()) {
    throw InputError("select_branch: no branches to choose from");
  }
  const SelectionCriterion other =
      criterion == SelectionCriterion::kPsnr ? SelectionCriterion::kSsim : SelectionCriterion::kPsnr;

  // std::map iterates labels in ascending order, so keeping the first of
  // equal candidates implements the lexicographic tie-break.
  auto best = reports.begin();
  for (auto it = std::next(reports.begin()); it != reports.end(); ++it) {
    const double a = criterion_value(it->second, criterion);
    const double b = criterion_value(best->second, criterion);
    if (a > b || (a == b && criterion_value(it->second, other) >
                                criterion_value(best->second, other))) {
      best = it;
    }
  }
  SelectionResult result;
  result.chosen = best->first;
  result.criterion = criterion;
  result.reports = reports;
  return result;
}

json report_to_json(const MetricReport& report) {
  json rows = json::array();
  for (const auto& s : report.images) {
    rows.push_back({{"name", s.name},
                    {"psnr", number_or_null(s.psnr)},
                    {"psnr_infinite", std::isinf(s.psnr)},
                    {"ssim", s.ssim}});
  }
  return {{"schema", "splatprep.metrics/1"},
          {"images", rows},
          {"summary",
           {{"count", report.count()},
            {"mean_psnr", number_or_null(report.mean_psnr)},
            {"mean_ssim", report.mean_ssim},
            {"infinite_psnr_count", report.infinite_psnr_count}}}};
}

MetricReport report_from_json(const json& j) {
  try {
    if (j.at("schema").get<std::string>() != "splatprep.metrics/1") {
      throw InputError("metric report: unsupported schema");
    }
    std::vector<ImageScore> scores;
    for (const auto& row : j.at("images")) {
      ImageScore s;
      s.name = row.at("name").get<std::string>();
      s.psnr = row.at("psnr_infinite").get<bool>() ? std::numeric_limits<double>::infinity()
                                                   : row.at("psnr").get<double>();
      s.ssim = row.at("ssim").get<double>();
      scores.push_back(std::move(s));
    }
    return MetricReport::from_scores(std::move(scores));
  } catch (const json::exception& e) {
    throw InputError(std::string("metric report: ") + e.what());
  }
}

json selection_to_json(const SelectionResult& result) {
  json branches = json::object();
  for (const auto& [label, report] : result.reports) {
    branches[label] = report_to_json(report);
  }
  return {{"schema", "splatprep.selection/1"},
          {"criterion", selection_criterion_name(result.criterion)},
          {"chosen", result.chosen},
          {"overridden", result.overridden},
          {"branches", branches}};
}

}  // namespace splatprep
