#include <random>

#include <benchmark/benchmark.h>

#include "splatprep/enhance.hpp"
#include "splatprep/geometry.hpp"
#include "splatprep/quality.hpp"

namespace {

using namespace splatprep;

ImageBuffer noise_image(int w, int h, uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  ImageBuffer img(w, h);
  for (double& v : img.data) v = unit(rng);
  return img;
}

PointCloud noise_cloud(std::size_t n, uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> coord(-5.0, 5.0);
  std::uniform_int_distribution<int> byte(0, 255);
  PointCloud c;
  for (std::size_t i = 0; i < n; ++i) {
    c.positions.emplace_back(coord(rng), coord(rng), coord(rng));
    c.colors.push_back({static_cast<uint8_t>(byte(rng)), static_cast<uint8_t>(byte(rng)),
                        static_cast<uint8_t>(byte(rng))});
  }
  c.observations.assign(n, 1);
  return c;
}

void BM_VoxelFuse(benchmark::State& state) {
  std::vector<PointCloud> clouds;
  for (uint64_t s = 0; s < 4; ++s) clouds.push_back(noise_cloud(250000, s));
  const auto threads = static_cast<unsigned>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(voxel_fuse(clouds, 0.05, 2, threads));
  }
  state.SetItemsProcessed(state.iterations() * 1000000);
}
BENCHMARK(BM_VoxelFuse)->Arg(1)->Arg(4)->UseRealTime()->Unit(benchmark::kMillisecond);

void BM_BackProject(benchmark::State& state) {
  const int w = 1280, h = 720;
  CameraIntrinsics k;
  k.model = CameraModelType::kPinhole;
  k.width = w;
  k.height = h;
  k.fx = k.fy = 1000.0;
  k.cx = w / 2.0;
  k.cy = h / 2.0;
  DepthMap depth(w, h, 3.0f);
  const ImageBuffer color = noise_image(w, h, 7);
  const auto stride = static_cast<int>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(back_project(depth, k, Pose{}, &color, {.stride = stride}));
  }
}
BENCHMARK(BM_BackProject)->Arg(1)->Arg(2)->Arg(4)->Unit(benchmark::kMillisecond);

void BM_Ssim(benchmark::State& state) {
  const int side = static_cast<int>(state.range(0));
  const ImageBuffer a = noise_image(side, side, 1);
  const ImageBuffer b = noise_image(side, side, 2);
  for (auto _ : state) benchmark::DoNotOptimize(ssim(a, b));
}
BENCHMARK(BM_Ssim)->Arg(256)->Arg(1024)->Unit(benchmark::kMillisecond);

void BM_HistogramMatch(benchmark::State& state) {
  const ImageBuffer src = noise_image(1024, 768, 3);
  const ImageBuffer ref = noise_image(800, 600, 4);
  for (auto _ : state) benchmark::DoNotOptimize(histogram_match(src, ref));
}
BENCHMARK(BM_HistogramMatch)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
