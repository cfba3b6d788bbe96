// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "cli.hpp"
#include "splatprep/colmap_model.hpp"
#include "splatprep/enhance.hpp"
#include "splatprep/geometry.hpp"
#include "splatprep/quality.hpp"
#include "support/fusion_oracle.hpp"
#include "support/hist_oracle.hpp"
#include "support/test_support.hpp"

namespace fs = std::filesystem;
using namespace splatprep;
using testing::Rng;
using testing::TempDir;

namespace {

// Collects the first failure message of a criterion.
struct Check {
  std::string failure;
  void expect(bool ok, const std::string& what) {
    if (!ok && failure.empty()) failure = what;
  }
};

struct Criterion {
  int id;
  std::string title;
  double budget_seconds;  // <= 0 means untimed
  std::function<void(Check&)> body;
};

std::string fmt(const char* f, double a, double b = 0.0) {
  char buf[160];
  std::snprintf(buf, sizeof buf, f, a, b);
  return buf;
}

int run_cli(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  if (code != 0) std::fprintf(stderr, "cli failed (%d): %s\n", code, err.str().c_str());
  return code;
}

void colmap_round_trip(Check& c) {
  Rng rng(101);
  TempDir dir;
  for (int t = 0; t < 100; ++t) {
    const ColmapModel m = testing::random_model(rng, 1000, 40);
    const fs::path a = dir / ("a" + std::to_string(t)), b = dir / ("b" + std::to_string(t));
    write_binary(m, a);
    write_binary(read_binary(a), b);
    for (const char* f : {"cameras.bin", "images.bin", "points3D.bin"}) {
      c.expect(testing::read_bytes(a / f) == testing::read_bytes(b / f),
               "model " + std::to_string(t) + ": " + f + " differs");
    }
  }
}

// 500 random cameras, 20 random pixels each; sources identify the pixel of
// every lifted point.
void projection_round_trip(Check& c) {
  Rng rng(202);
  double worst_px = 0.0, worst_depth = 0.0;
  int triples = 0;
  for (int cam = 0; cam < 500; ++cam) {
    const CameraIntrinsics k = testing::random_intrinsics(rng);
    const Pose pose = testing::random_pose(rng);
    DepthMap d(static_cast<int>(k.width), static_cast<int>(k.height));
    int placed = 0;
    while (placed < 20) {
      const int u = testing::uniform_int(rng, 0, static_cast<int>(k.width) - 1);
      const int v = testing::uniform_int(rng, 0, static_cast<int>(k.height) - 1);
      if (d.at(u, v) != 0.0f) continue;
      d.at(u, v) = static_cast<float>(testing::uniform(rng, 0.1, 100.0));
      ++placed;
    }
    const PointCloud cloud = back_project(d, k, pose, nullptr, {.stride = 1, .track_image_id = 1});
    c.expect(cloud.size() == 20, "lost samples");
    for (std::size_t i = 0; i < cloud.size(); ++i) {
      const PointSource& s = cloud.sources[i].front();
      const Projection p = project(cloud.positions[i], k, pose);
      const double z = d.at(static_cast<int>(s.u), static_cast<int>(s.v));
      worst_px = std::max({worst_px, std::abs(p.u - (s.u + 0.5)), std::abs(p.v - (s.v + 0.5))});
      worst_depth = std::max(worst_depth, std::abs(p.depth / z - 1.0));
      ++triples;
    }
  }
  c.expect(triples == 10000, "expected 10^4 triples");
  c.expect(worst_px <= 1e-9, fmt("pixel error %.3e", worst_px));
  c.expect(worst_depth <= 1e-9, fmt("relative depth error %.3e", worst_depth));
}

bool bit_equal(const PointCloud& a, const PointCloud& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (int k = 0; k < 3; ++k) {
      if (std::memcmp(&a.positions[i][k], &b.positions[i][k], sizeof(double)) != 0) return false;
    }
  }
  return a.colors == b.colors && a.observations == b.observations && a.sources == b.sources;
}

void fusion_oracle(Check& c) {
  Rng rng(303);
  struct Setting {
    std::size_t points;
    double voxel;
    uint32_t min_obs;
  };
  const std::vector<Setting> settings{
      {100000, 0.05, 1}, {100000, 0.2, 3}, {50000, 0.01, 1}, {100000, 0.5, 10}, {20000, 1.3, 2},
      {100000, 0.1, 2}};
  for (const Setting& s : settings) {
    // Split into a few clouds so cross-cloud accumulation order matters.
    std::vector<PointCloud> clouds;
    std::size_t left = s.points;
    while (left > 0) {
      const std::size_t n = std::min<std::size_t>(left, testing::uniform_int(rng, 1000, 40000));
      clouds.push_back(testing::random_cloud(rng, n, 4.0));
      left -= n;
    }
    const PointCloud expect = testing::brute_force_fuse(clouds, s.voxel, s.min_obs);
    for (unsigned threads : {1u, 4u}) {
      const PointCloud got = voxel_fuse(clouds, s.voxel, s.min_obs, threads);
      c.expect(bit_equal(got, expect), fmt("mismatch at voxel %g min_obs %g", s.voxel, s.min_obs));
    }
  }
}

void metric_closed_forms(Check& c) {
  const double p = psnr(ImageBuffer(32, 32, 0.0), ImageBuffer(32, 32, 0.1));
  c.expect(std::abs(p - 20.0) <= 1e-9, fmt("psnr %.12f", p));
  const double s = ssim(ImageBuffer(32, 32, 0.0), ImageBuffer(32, 32, 1.0));
  c.expect(std::abs(s - 1e-4 / (1 + 1e-4)) <= 1e-9, fmt("ssim const %.12e", s));
  Rng rng(404);
  for (int t = 0; t < 10; ++t) {
    const ImageBuffer x = testing::random_image(rng, testing::uniform_int(rng, 11, 96),
                                                testing::uniform_int(rng, 11, 96));
    c.expect(ssim(x, x) == 1.0, fmt("ssim(x,x) = %.17g", ssim(x, x)));
  }
}

// Sources hold every 8-bit level equally often in each channel.
ImageBuffer balanced_source(Rng& rng, int width, int height) {
  ImageBuffer img(width, height);
  const std::size_t n = img.pixel_count();
  for (int ch = 0; ch < 3; ++ch) {
    std::vector<int> levels(n);
    for (std::size_t i = 0; i < n; ++i) levels[i] = static_cast<int>(i % 256);
    std::shuffle(levels.begin(), levels.end(), rng);
    for (std::size_t i = 0; i < n; ++i) img.data[3 * i + ch] = levels[i] / 255.0;
  }
  return img;
}

void histogram_matching(Check& c) {
  Rng rng(505);
  for (int t = 0; t < 50; ++t) {
    const int w = 16 * testing::uniform_int(rng, 1, 6);
    const int h = 16 * testing::uniform_int(rng, 1, 6);
    const ImageBuffer src = balanced_source(rng, w, h);
    const ImageBuffer ref = testing::random_image(rng, testing::uniform_int(rng, 8, 100),
                                                  testing::uniform_int(rng, 8, 100));
    const ImageBuffer out = histogram_match(src, ref);
    const double bound = std::max(1.0 / static_cast<double>(src.pixel_count()),
                                  1.0 / static_cast<double>(ref.pixel_count())) +
                         1.0 / 256.0;
    for (int ch = 0; ch < 3; ++ch) {
      const double gap = testing::cdf_sup_distance(out, ref, ch);
      c.expect(gap <= bound, fmt("pair %g: CDF gap %.6f", t, gap));
      const LevelMap map = histogram_level_map(channel_histogram(src, ch), channel_histogram(ref, ch));
      for (std::size_t v = 1; v < 256; ++v) c.expect(map[v - 1] <= map[v], "map not monotone");
    }
    // Sample-level monotonicity.
    for (std::size_t i = 3; i < src.data.size(); ++i) {
      const std::size_t j = i - 3;
      if (src.data[j] <= src.data[i]) c.expect(out.data[j] <= out.data[i], "output order broken");
    }
    const ImageBuffer any = testing::random_image(rng, w, h);
    const ImageBuffer self = histogram_match(any, any);
    for (std::size_t i = 0; i < any.data.size(); ++i) {
      c.expect(std::abs(self.data[i] - any.data[i]) <= 1.0 / 255.0, "self-match deviation");
    }
  }
}

void enhancement_algebra(Check& c) {
  Rng rng(606);
  // Colors near gray keep every saturation result inside [0, 1].
  ImageBuffer img(24, 24);
  for (double& v : img.data) v = testing::uniform(rng, 0.35, 0.65);
  for (double sat : {0.0, 0.3, 1.0, 1.25, 1.6}) {
    const ImageBuffer out = apply_saturation(img, sat);
    for (std::size_t p = 0; p < img.pixel_count(); ++p) {
      const double* a = &img.data[3 * p];
      const double* b = &out.data[3 * p];
      const double ya = luminance_of(a[0], a[1], a[2]);
      const double yb = luminance_of(b[0], b[1], b[2]);
      c.expect(std::abs(ya - yb) <= 1e-12, fmt("luminance drift %.3e at sat %g", ya - yb, sat));
      // Largest residual fixes the factor; the others must agree.
      int big = 0;
      for (int k = 1; k < 3; ++k) {
        if (std::abs(a[k] - ya) > std::abs(a[big] - ya)) big = k;
      }
      const double factor = (b[big] - yb) / (a[big] - ya);
      c.expect(factor >= -1e-12, "negative chrominance factor");
      for (int k = 0; k < 3; ++k) {
        c.expect(std::abs((b[k] - yb) - factor * (a[k] - ya)) <= 1e-12, "residuals not scaled");
      }
    }
  }

  const ImageBuffer x = testing::random_image(rng, 40, 30);
  c.expect(enhance_pipeline(x, EnhanceParams{}) == x, "identity parameters changed the image");

  EnhanceParams p;
  p.beta = 0.06;
  p.alpha = 1.3;
  p.sat = 1.4;
  p.gamma = 0.7;
  for (const auto& order : {default_stage_order(), exposure_first_stage_order()}) {
    p.order = order;
    ImageBuffer manual = x;
    for (EnhanceStage s : order) {
      switch (s) {
        case EnhanceStage::kBrightness: manual = apply_brightness(manual, p.beta); break;
        case EnhanceStage::kContrast: manual = apply_contrast(manual, p.alpha); break;
        case EnhanceStage::kSaturation: manual = apply_saturation(manual, p.sat); break;
        case EnhanceStage::kGamma: manual = apply_gamma(manual, p.gamma); break;
      }
    }
    c.expect(enhance_pipeline(x, p) == manual,
             "pipeline differs from chained stages for " + format_stage_order(order));
  }
  p.order = default_stage_order();
  const ImageBuffer a = enhance_pipeline(x, p);
  p.order = exposure_first_stage_order();
  c.expect(!(enhance_pipeline(x, p) == a), "the two orders gave identical output");
}

std::vector<std::string> files_of(const fs::path& dir) {
  std::vector<std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (e.is_regular_file()) out.push_back(fs::relative(e.path(), dir).string());
  }
  std::sort(out.begin(), out.end());
  return out;
}

bool same_tree(const fs::path& a, const fs::path& b) {
  const auto fa = files_of(a);
  if (fa != files_of(b) || fa.empty()) return false;
  for (const auto& f : fa) {
    if (testing::read_bytes(a / f) != testing::read_bytes(b / f)) return false;
  }
  return true;
}

void cli_determinism(Check& c) {
  TempDir root;
  const testing::PlaneScene scene = testing::make_plane_scene(96, 72);
  scene.write(root.path());
  c.expect(run_cli({"convert-cameras", "--cameras", (root / "transforms.json").string(), "--out",
                    (root / "sparse").string()}) == 0,
           "convert-cameras failed");

  Rng rng(707);
  fs::create_directories(root / "photos");
  for (int i = 0; i < 4; ++i) {
    save_image(testing::random_image_u8(rng, 40, 30),
               root / "photos" / ("p" + std::to_string(i) + ".png"));
  }
  save_image(testing::random_image_u8(rng, 25, 25), root / "ref.png");

  struct Job {
    std::string name;
    std::function<std::vector<std::string>(const fs::path&, const std::string&)> args;
  };
  const std::vector<Job> jobs{
      {"fuse-depth",
       [&](const fs::path& out, const std::string& th) {
         return std::vector<std::string>{"fuse-depth", "--model", (root / "sparse").string(),
                                         "--depth", (root / "depth").string(), "--images",
                                         root.path().string(), "--voxel-size", "0.1",
                                         "--with-tracks", "--threads", th,
                                         "--out", out.string(), "--format", "both"};
       }},
      {"init-random",
       // No thread option: the generator is sequential by construction.
       [&](const fs::path& out, const std::string&) {
         return std::vector<std::string>{"init-random", "--model", (root / "sparse").string(),
                                         "--count", "20000", "--seed", "42", "--out",
                                         out.string(), "--format", "both", "--ply",
                                         (out / "init.ply").string()};
       }},
      {"enhance",
       [&](const fs::path& out, const std::string& th) {
         return std::vector<std::string>{"enhance", "--in", (root / "photos").string(), "--out",
                                         out.string(), "--ref", (root / "ref.png").string(),
                                         "--beta", "0.05", "--gamma", "0.8", "--sat", "1.2",
                                         "--threads", th};
       }},
  };
  for (const Job& job : jobs) {
    fs::path first;
    int run_index = 0;
    for (const char* th : {"1", "1", "3", "8"}) {
      const fs::path out = root / (job.name + "_" + std::to_string(run_index++));
      c.expect(run_cli(job.args(out, th)) == 0, job.name + " failed");
      if (first.empty()) {
        first = out;
        if (job.name == "fuse-depth") {
          c.expect(!read_binary(out).points3D.empty(), "fuse-depth produced no points");
        }
      } else {
        c.expect(same_tree(first, out), job.name + " output differs at threads " + th);
      }
    }
  }
}

void end_to_end(Check& c) {
  TempDir root;
  const testing::PlaneScene scene = testing::make_plane_scene(192, 144);
  scene.write(root.path());
  const uint32_t min_obs = 2;
  c.expect(run_cli({"convert-cameras", "--cameras", (root / "transforms.json").string(), "--out",
                    (root / "sparse").string()}) == 0,
           "convert-cameras failed");
  c.expect(run_cli({"fuse-depth", "--model", (root / "sparse").string(), "--depth",
                    (root / "depth").string(), "--images", root.path().string(), "--min-obs",
                    std::to_string(min_obs), "--voxel-size", "0.1", "--with-tracks", "--out",
                    (root / "fused").string()}) == 0,
           "fuse-depth failed");
  if (!c.failure.empty()) return;

  const ColmapModel m = read_binary(root / "fused");
  m.validate();
  c.expect(m.images.size() == 2, "expected two images");
  c.expect(m.points3D.size() > 50, "too few fused points");
  const CameraIntrinsics k = to_intrinsics(m.cameras.at(0));
  double worst_outside = 0.0, worst_plane = 0.0;
  for (const auto& pt : m.points3D) {
    const Eigen::Vector3d x(pt.xyz[0], pt.xyz[1], pt.xyz[2]);
    c.expect(pt.track.size() >= min_obs, "observation count below min_obs");
    for (const auto& img : m.images) {
      const Projection p = project(x, k, image_pose(img));
      const double w = static_cast<double>(k.width), h = static_cast<double>(k.height);
      const double outside = std::max({-p.u, p.u - w, -p.v, p.v - h, 0.0});
      worst_outside = std::max(worst_outside, outside);
    }
    const Eigen::Vector3d n = scene.normal;
    worst_plane = std::max(worst_plane, std::abs(n.dot(x) - scene.offset) / n.norm());
    c.expect(scene.on_rectangle(x, 1e-4), "fused point off the textured rectangle");
  }
  c.expect(worst_outside <= 0.5, fmt("point projects %.3f px outside a view", worst_outside));
  c.expect(worst_plane <= 1e-4, fmt("plane distance %.3e", worst_plane));
}

MetricReport report_with(double p, double s) {
  return MetricReport::from_scores({{"x.png", p, s}});
}

void selection(Check& c) {
  const auto pick = [](std::map<std::string, MetricReport> r, SelectionCriterion crit) {
    return select_branch(r, crit).chosen;
  };
  c.expect(pick({{"sparse", report_with(15.2, 0.55)}, {"dense", report_with(18.4, 0.68)},
                 {"base", report_with(11.0, 0.53)}},
                SelectionCriterion::kPsnr) == "dense",
           "argmax by psnr");
  c.expect(pick({{"a", report_with(30, 0.5)}, {"b", report_with(20, 0.6)}},
                SelectionCriterion::kSsim) == "b",
           "argmax by ssim");
  c.expect(pick({{"a", report_with(18, 0.6)}, {"b", report_with(18, 0.7)}},
                SelectionCriterion::kPsnr) == "b",
           "first tie-break (other metric)");
  c.expect(pick({{"a", report_with(18, 0.6)}, {"b", report_with(19, 0.6)}},
                SelectionCriterion::kSsim) == "b",
           "first tie-break under ssim");
  c.expect(pick({{"zeta", report_with(18, 0.7)}, {"alpha", report_with(18, 0.7)}},
                SelectionCriterion::kPsnr) == "alpha",
           "second tie-break (label)");
}

}  // namespace

int main() {
  const std::vector<Criterion> criteria{
      {1, "COLMAP binary write-read-write is byte-identical on 100 models", 10, colmap_round_trip},
      {2, "back_project/project round trip on 10^4 triples", 5, projection_round_trip},
      {3, "voxel_fuse equals the brute-force oracle bit-for-bit", 30, fusion_oracle},
      {4, "PSNR/SSIM closed forms", 0, metric_closed_forms},
      {5, "histogram matching CDF bound, self-match, monotonicity", 0, histogram_matching},
      {6, "enhancement algebra and stage orders", 0, enhancement_algebra},
      {7, "CLI outputs identical across reruns and thread counts", 0, cli_determinism},
      {8, "two-view plane scene end to end", 60, end_to_end},
      {9, "branch selection argmax and tie-breaks", 0, selection},
  };
  int failures = 0;
  for (const Criterion& cr : criteria) {
    Check check;
    const auto start = std::chrono::steady_clock::now();
    try {
      cr.body(check);
    } catch (const std::exception& e) {
      check.expect(false, std::string("exception: ") + e.what());
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (cr.budget_seconds > 0 && secs > cr.budget_seconds) {
      check.expect(false, fmt("took %.2f s, budget %.0f s", secs, cr.budget_seconds));
    }
    const bool ok = check.failure.empty();
    failures += ok ? 0 : 1;
    std::printf("%s criterion %d: %s (%.2f s)%s%s\n", ok ? "PASS" : "FAIL", cr.id,
                cr.title.c_str(), secs, ok ? "" : " - ", check.failure.c_str());
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failures,
              criteria.size());
  return failures == 0 ? 0 : 1;
}
