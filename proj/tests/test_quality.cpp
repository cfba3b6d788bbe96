#include <cmath>
#include <numeric>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "splatprep/error.hpp"
#include "splatprep/quality.hpp"
#include "support/test_support.hpp"

namespace splatprep {
namespace {

namespace fs = std::filesystem;
using testing::Rng;
using testing::TempDir;

// Direct (non-separable) SSIM for one channel: explicit 11x11 weights.
double ssim_oracle_channel(const ImageBuffer& a, const ImageBuffer& b, int c) {
  const auto g = gaussian_taps();
  double total = 0.0;
  int windows = 0;
  for (int y0 = 0; y0 + 11 <= a.height; ++y0) {
    for (int x0 = 0; x0 + 11 <= a.width; ++x0) {
      double mx = 0, my = 0, sxx = 0, syy = 0, sxy = 0;
      for (int j = 0; j < 11; ++j) {
        for (int i = 0; i < 11; ++i) {
          const double w = g[static_cast<std::size_t>(i)] * g[static_cast<std::size_t>(j)];
          const double x = a.at(x0 + i, y0 + j, c);
          const double y = b.at(x0 + i, y0 + j, c);
          mx += w * x;
          my += w * y;
          sxx += w * x * x;
          syy += w * y * y;
          sxy += w * x * y;
        }
      }
      const double vx = sxx - mx * mx, vy = syy - my * my, cov = sxy - mx * my;
      total += ((2 * mx * my + 1e-4) * (2 * cov + 9e-4)) /
               ((mx * mx + my * my + 1e-4) * (vx + vy + 9e-4));
      ++windows;
    }
  }
  return total / windows;
}

TEST(Psnr, ClosedForms) {
  EXPECT_NEAR(psnr(ImageBuffer(8, 8, 0.0), ImageBuffer(8, 8, 0.1)), 20.0, 1e-9);
  EXPECT_NEAR(psnr(ImageBuffer(8, 8, 0.5), ImageBuffer(8, 8, 0.6)), 20.0, 1e-9);
  EXPECT_NEAR(psnr(ImageBuffer(3, 2, 0.0), ImageBuffer(3, 2, 1.0)), 0.0, 1e-12);
  Rng rng(1);
  const ImageBuffer a = testing::random_image(rng, 9, 9);
  EXPECT_TRUE(std::isinf(psnr(a, a)));
  EXPECT_GT(psnr(a, a), 0);
  const ImageBuffer b = testing::random_image(rng, 9, 9);
  EXPECT_EQ(psnr(a, b), psnr(b, a));
  EXPECT_THROW(psnr(a, ImageBuffer(9, 8)), InputError);
}

TEST(Psnr, DecreasesWithNoiseAmplitude) {
  Rng rng(2);
  const ImageBuffer base(32, 32, 0.5);
  ImageBuffer noise_dir = testing::random_image(rng, 32, 32);
  double prev = std::numeric_limits<double>::infinity();
  for (double amp : {0.01, 0.02, 0.05, 0.1, 0.2}) {
    ImageBuffer noisy = base;
    for (std::size_t i = 0; i < noisy.data.size(); ++i) {
      noisy.data[i] += amp * (noise_dir.data[i] - 0.5);
    }
    const double p = psnr(base, noisy);
    EXPECT_LT(p, prev);
    prev = p;
  }
}

TEST(Ssim, GaussianTaps) {
  const auto g = gaussian_taps();
  ASSERT_EQ(g.size(), 11u);
  EXPECT_NEAR(std::accumulate(g.begin(), g.end(), 0.0), 1.0, 1e-12);
  for (std::size_t i = 0; i < 5; ++i) EXPECT_EQ(g[i], g[10 - i]);
  EXPECT_NEAR(g[4] / g[5], std::exp(-1.0 / (2 * 1.5 * 1.5)), 1e-14);
}

TEST(Ssim, ClosedFormsAndIdentity) {
  EXPECT_NEAR(ssim(ImageBuffer(16, 16, 0.0), ImageBuffer(16, 16, 1.0)), 1e-4 / (1 + 1e-4), 1e-9);
  Rng rng(3);
  for (int t = 0; t < 10; ++t) {
    const ImageBuffer x = testing::random_image(rng, testing::uniform_int(rng, 11, 40),
                                                testing::uniform_int(rng, 11, 40));
    EXPECT_EQ(ssim(x, x), 1.0);
  }
  EXPECT_THROW(ssim(ImageBuffer(10, 20), ImageBuffer(10, 20)), InputError);
  EXPECT_THROW(ssim(ImageBuffer(12, 12), ImageBuffer(12, 13)), InputError);
}

TEST(Ssim, MatchesDirectWindowOracle) {
  Rng rng(4);
  for (int t = 0; t < 3; ++t) {
    const ImageBuffer a = testing::random_image(rng, 23, 17);
    ImageBuffer b = a;
    for (double& v : b.data) v = std::clamp(v + testing::uniform(rng, -0.2, 0.2), 0.0, 1.0);
    const double oracle =
        (ssim_oracle_channel(a, b, 0) + ssim_oracle_channel(a, b, 1) + ssim_oracle_channel(a, b, 2)) /
        3.0;
    EXPECT_NEAR(ssim(a, b), oracle, 1e-12);
  }
}

TEST(Ssim, SymmetricAndBounded) {
  Rng rng(5);
  for (int t = 0; t < 10; ++t) {
    const ImageBuffer a = testing::random_image(rng, 20, 20);
    const ImageBuffer b = testing::random_image(rng, 20, 20);
    const double s = ssim(a, b);
    EXPECT_NEAR(s, ssim(b, a), 1e-12);
    EXPECT_GE(s, -1.0);
    EXPECT_LE(s, 1.0);
  }
}

TEST(Report, AggregatesAndInfinities) {
  const double inf = std::numeric_limits<double>::infinity();
  const MetricReport r =
      MetricReport::from_scores({{"c.png", 30.0, 0.9}, {"a.png", inf, 1.0}, {"b.png", 20.0, 0.5}});
  EXPECT_EQ(r.images[0].name, "a.png");
  EXPECT_EQ(r.images[2].name, "c.png");
  EXPECT_EQ(r.mean_psnr, 25.0);
  EXPECT_NEAR(r.mean_ssim, 0.8, 1e-15);
  EXPECT_EQ(r.infinite_psnr_count, 1u);
  EXPECT_EQ(r.count(), 3u);
  const MetricReport all_inf = MetricReport::from_scores({{"a", inf, 1.0}});
  EXPECT_TRUE(std::isinf(all_inf.mean_psnr));
  EXPECT_THROW(MetricReport::from_scores({}), InputError);
  EXPECT_THROW(MetricReport::from_scores({{"a", 1, 1}, {"a", 2, 1}}), InputError);
}

TEST(Report, JsonRoundTrip) {
  const double inf = std::numeric_limits<double>::infinity();
  const MetricReport r = MetricReport::from_scores({{"a", inf, 1.0}, {"b", 21.123456789, 0.25}});
  const nlohmann::json j = report_to_json(r);
  EXPECT_EQ(j["schema"], "splatprep.metrics/1");
  EXPECT_TRUE(j["images"][0]["psnr"].is_null());
  EXPECT_TRUE(j["images"][0]["psnr_infinite"].get<bool>());
  EXPECT_EQ(j["summary"]["infinite_psnr_count"], 1);
  EXPECT_EQ(report_from_json(nlohmann::json::parse(j.dump())), r);
}

TEST(EvaluateDir, FixturesAndErrors) {
  Rng rng(6);
  TempDir pred, gt;
  std::vector<ImageScore> expect;
  for (const char* name : {"b.png", "a.png", "c.png"}) {
    const ImageBuffer g = testing::random_image_u8(rng, 16, 12);
    ImageBuffer p = g;
    for (double& v : p.data) v = std::clamp(v + 3.0 / 255.0, 0.0, 1.0);
    save_image(g, gt / name);
    save_image(p, pred / name);
    const ImageBuffer stored = load_image(pred / name);  // exact k/255 grid
    expect.push_back({name, psnr(stored, g), ssim(stored, g)});
  }
  const MetricReport r = evaluate_dir(pred.path(), gt.path());
  EXPECT_EQ(r, MetricReport::from_scores(expect));
  EXPECT_NEAR(r.mean_psnr, (expect[0].psnr + expect[1].psnr + expect[2].psnr) / 3.0, 1e-12);
  EXPECT_EQ(evaluate_dir(pred.path(), gt.path(), 4), r);

  const MetricReport self = evaluate_dir(gt.path(), gt.path());
  EXPECT_EQ(self.mean_ssim, 1.0);
  EXPECT_EQ(self.infinite_psnr_count, 3u);

  fs::remove(gt / "c.png");
  EXPECT_THROW(evaluate_dir(pred.path(), gt.path()), InputError);
  TempDir empty;
  EXPECT_THROW(evaluate_dir(empty.path(), gt.path()), InputError);
}

MetricReport report_with(double psnr_mean, double ssim_mean) {
  return MetricReport::from_scores({{"x.png", psnr_mean, ssim_mean}});
}

TEST(Select, ArgmaxAndTieBreaks) {
  EXPECT_EQ(select_branch({{"only", report_with(10, 0.1)}}, SelectionCriterion::kPsnr).chosen,
            "only");
  EXPECT_EQ(select_branch({{"a", report_with(18.0, 0.9)}, {"b", report_with(18.5, 0.1)}},
                          SelectionCriterion::kPsnr)
                .chosen,
            "b");
  EXPECT_EQ(select_branch({{"a", report_with(18.0, 0.6)}, {"b", report_with(18.0, 0.7)}},
                          SelectionCriterion::kPsnr)
                .chosen,
            "b");
  EXPECT_EQ(select_branch({{"zeta", report_with(18.0, 0.7)}, {"alpha", report_with(18.0, 0.7)}},
                          SelectionCriterion::kPsnr)
                .chosen,
            "alpha");
  EXPECT_EQ(select_branch({{"a", report_with(30, 0.5)}, {"b", report_with(20, 0.6)}},
                          SelectionCriterion::kSsim)
                .chosen,
            "b");
  EXPECT_THROW(select_branch({}, SelectionCriterion::kPsnr), InputError);
  EXPECT_THROW(parse_selection_criterion("lpips"), InputError);
}

TEST(Select, ShiftInvariant) {
  Rng rng(7);
  for (int t = 0; t < 50; ++t) {
    std::map<std::string, MetricReport> reports, shifted;
    const double shift = testing::uniform(rng, -10, 10);
    for (int b = 0; b < 4; ++b) {
      const std::string label = "branch" + std::to_string(b);
      const double p = std::round(testing::uniform(rng, 10, 30));
      const double s = testing::uniform(rng, 0, 1);
      reports.emplace(label, report_with(p, s));
      shifted.emplace(label, report_with(p + shift, s));
    }
    EXPECT_EQ(select_branch(reports, SelectionCriterion::kPsnr).chosen,
              select_branch(shifted, SelectionCriterion::kPsnr).chosen);
  }
}

TEST(Select, JsonShape) {
  SelectionResult r = select_branch({{"a", report_with(1, 0.5)}, {"b", report_with(2, 0.4)}},
                                    SelectionCriterion::kPsnr);
  r.overridden = true;
  const nlohmann::json j = selection_to_json(r);
  EXPECT_EQ(j["schema"], "splatprep.selection/1");
  EXPECT_EQ(j["chosen"], "b");
  EXPECT_EQ(j["criterion"], "psnr");
  EXPECT_TRUE(j["overridden"].get<bool>());
  EXPECT_EQ(j["branches"]["a"]["summary"]["count"], 1);
}

}  // namespace
}  // namespace splatprep
