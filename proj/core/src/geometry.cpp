#include "splatprep/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <thread>
#include <unordered_map>

#include <spdlog/spdlog.h>

#include "splatprep/error.hpp"

namespace splatprep {

namespace {

// Keeps voxel indices far from int64 overflow.
constexpr double kMaxVoxelIndex = 4.0e18;

struct VoxelKeyHash {
  std::size_t operator()(const VoxelKey& k) const noexcept {
    uint64_t h = static_cast<uint64_t>(k.x) * 0x9E3779B97F4A7C15ull;
    h ^= static_cast<uint64_t>(k.y) + 0x7F4A7C159E3779B9ull + (h << 6) + (h >> 2);
    h ^= static_cast<uint64_t>(k.z) + 0x94D049BB133111EBull + (h << 6) + (h >> 2);
    h ^= h >> 31;
    h *= 0xBF58476D1CE4E5B9ull;
    h ^= h >> 29;
    return static_cast<std::size_t>(h);
  }
};

struct Cell {
  Eigen::Vector3d position_sum = Eigen::Vector3d::Zero();
  std::array<double, 3> color_sum{0.0, 0.0, 0.0};
  uint32_t count = 0;
  std::vector<PointSource> sources;
};

using CellMap = std::unordered_map<VoxelKey, Cell, VoxelKeyHash>;

// Accumulates every point whose key hashes into `shard` (of `shards`), in
// (cloud, point) order.
void accumulate_shard(std::span<const PointCloud> clouds, double voxel_size, bool track,
                      std::size_t shard, std::size_t shards, CellMap& cells) {
  const VoxelKeyHash hasher;
  for (const PointCloud& cloud : clouds) {
    for (std::size_t i = 0; i < cloud.size(); ++i) {
      const Eigen::Vector3d& p = cloud.positions[i];
      const VoxelKey key = voxel_key(p, voxel_size);
      if (shards > 1 && hasher(key) % shards != shard) continue;
      Cell& cell = cells[key];
      cell.position_sum += p;
      const Rgb8& c = cloud.colors[i];
      cell.color_sum[0] += c[0];
      cell.color_sum[1] += c[1];
      cell.color_sum[2] += c[2];
      ++cell.count;
      if (track) {
        const auto& src = cloud.sources[i];
        cell.sources.insert(cell.sources.end(), src.begin(), src.end());
      }
    }
  }
}

uint8_t mean_channel(double sum, uint32_t count) {
  const double m = std::round(sum / static_cast<double>(count));
  return static_cast<uint8_t>(std::clamp(m, 0.0, 255.0));
}

}  // namespace

DepthMap::DepthMap(int w, int h, float fill) : width(w), height(h) {
  if (w <= 0 || h <= 0) {
    throw InputError("depth map dimensions must be positive");
  }
  depth.assign(static_cast<std::size_t>(w) * static_cast<std::size_t>(h), fill);
}

void PointCloud::validate() const {
  if (colors.size() != positions.size() || observations.size() != positions.size()) {
    throw InputError("point cloud: positions, colors and observations differ in length");
  }
  if (!sources.empty() && sources.size() != positions.size()) {
    throw InputError("point cloud: sources length differs from positions");
  }
  for (const auto& p : positions) {
    if (!p.allFinite()) {
      throw InputError("point cloud: non-finite position");
    }
  }
}

void Aabb::validate() const {
  if (!min.allFinite() || !max.allFinite()) {
    throw InputError("bounding box is not finite");
  }
  if ((min.array() > max.array()).any()) {
    throw InputError("bounding box min exceeds max");
  }
}

PointCloud back_project(const DepthMap& depth, const CameraIntrinsics& k, const Pose& pose,
                        const ImageBuffer* color, const BackProjectOptions& options) {
  k.validate();
  if (options.stride < 1) {
    throw InputError("back_project: stride must be >= 1");
  }
  if (depth.width <= 0 || depth.height <= 0 ||
      depth.depth.size() != static_cast<std::size_t>(depth.width) *
                                static_cast<std::size_t>(depth.height)) {
    throw InputError("back_project: malformed depth map");
  }
  if (static_cast<uint64_t>(depth.width) != k.width ||
      static_cast<uint64_t>(depth.height) != k.height) {
    throw InputError("back_project: depth map is " + std::to_string(depth.width) + "x" +
                     std::to_string(depth.height) + " but camera is " + std::to_string(k.width) +
                     "x" + std::to_string(k.height));
  }
  if (color != nullptr && (color->width != depth.width || color->height != depth.height)) {
    throw InputError("back_project: color image is " + std::to_string(color->width) + "x" +
                     std::to_string(color->height) + " but depth map is " +
                     std::to_string(depth.width) + "x" + std::to_string(depth.height));
  }

  const Eigen::Matrix3d rt = pose.rotation().transpose();
  const std::size_t per_row = static_cast<std::size_t>((depth.width + options.stride - 1) /
                                                       options.stride);
  const std::size_t rows = static_cast<std::size_t>((depth.height + options.stride - 1) /
                                                    options.stride);

  PointCloud cloud;
  cloud.positions.reserve(per_row * rows);
  cloud.colors.reserve(per_row * rows);
  const bool track = options.track_image_id.has_value();

  for (int v = 0; v < depth.height; v += options.stride) {
    for (int u = 0; u < depth.width; u += options.stride) {
      const float d = depth.at(u, v);
      if (!DepthMap::is_valid(d)) continue;
      const double dd = static_cast<double>(d);
      const Eigen::Vector3d cam(dd * ((u + 0.5 - k.cx) / k.fx), dd * ((v + 0.5 - k.cy) / k.fy),
                                dd);
      cloud.positions.push_back(rt * (cam - pose.tvec));
      if (color != nullptr) {
        cloud.colors.push_back({quantize_u8(color->at(u, v, 0)), quantize_u8(color->at(u, v, 1)),
                                quantize_u8(color->at(u, v, 2))});
      } else {
        cloud.colors.push_back(kMidGray);
      }
      if (track) {
        cloud.sources.push_back(
            {{*options.track_image_id, static_cast<uint32_t>(u), static_cast<uint32_t>(v)}});
      }
    }
  }
  cloud.observations.assign(cloud.positions.size(), 1u);

  if (cloud.empty()) {
    spdlog::warn("back_project: depth map has no valid samples at stride {}", options.stride);
  }
  return cloud;
}

Projection project(const Eigen::Vector3d& world, const CameraIntrinsics& k, const Pose& pose) {
  const Eigen::Vector3d cam = pose.to_camera(world);
  if (!(cam.z() > 0.0)) {
    throw InputError("project: point is at or behind the camera");
  }
  return {k.fx * cam.x() / cam.z() + k.cx, k.fy * cam.y() / cam.z() + k.cy, cam.z()};
}

VoxelKey voxel_key(const Eigen::Vector3d& p, double voxel_size) {
  const double x = std::floor(p.x() / voxel_size);
  const double y = std::floor(p.y() / voxel_size);
  const double z = std::floor(p.z() / voxel_size);
  if (!(std::abs(x) < kMaxVoxelIndex && std::abs(y) < kMaxVoxelIndex &&
        std::abs(z) < kMaxVoxelIndex)) {
    throw InputError("voxel index out of range (point too far or voxel too small)");
  }
  return {static_cast<int64_t>(x), static_cast<int64_t>(y), static_cast<int64_t>(z)};
}

PointCloud voxel_fuse(std::span<const PointCloud> clouds, double voxel_size, uint32_t min_obs,
                      unsigned threads) {
  if (!(voxel_size > 0.0) || !std::isfinite(voxel_size)) {
    throw InputError("voxel_fuse: voxel_size must be positive and finite");
  }
  if (min_obs < 1) {
    throw InputError("voxel_fuse: min_obs must be >= 1");
  }

  bool track = false;
  std::size_t total = 0;
  for (const PointCloud& c : clouds) {
    c.validate();
    total += c.size();
    if (!c.empty() && c.has_sources()) track = true;
  }
  for (const PointCloud& c : clouds) {
    if (!c.empty() && !c.has_sources()) track = false;
  }

  const std::size_t shards = std::max<std::size_t>(1, std::min<std::size_t>(threads, 64));
  std::vector<CellMap> maps(shards);
  if (shards == 1) {
    maps[0].reserve(total / 2 + 1);
    accumulate_shard(clouds, voxel_size, track, 0, 1, maps[0]);
  } else {
    std::vector<std::thread> workers;
    std::vector<std::exception_ptr> errors(shards);
    for (std::size_t s = 0; s < shards; ++s) {
      workers.emplace_back([&, s] {
        try {
          accumulate_shard(clouds, voxel_size, track, s, shards, maps[s]);
        } catch (...) {
          errors[s] = std::current_exception();
        }
      });
    }
    for (auto& w : workers) w.join();
    for (const auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
  }

  std::vector<std::pair<VoxelKey, Cell*>> kept;
  for (CellMap& m : maps) {
    for (auto& [key, cell] : m) {
      if (cell.count >= min_obs) kept.emplace_back(key, &cell);
    }
  }
  std::sort(kept.begin(), kept.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });

  PointCloud out;
  out.positions.reserve(kept.size());
  out.colors.reserve(kept.size());
  out.observations.reserve(kept.size());
  if (track) out.sources.reserve(kept.size());
  for (auto& [key, cell] : kept) {
    const double n = static_cast<double>(cell->count);
    out.positions.emplace_back(cell->position_sum.x() / n, cell->position_sum.y() / n,
                               cell->position_sum.z() / n);
    out.colors.push_back({mean_channel(cell->color_sum[0], cell->count),
                          mean_channel(cell->color_sum[1], cell->count),
                          mean_channel(cell->color_sum[2], cell->count)});
    out.observations.push_back(cell->count);
    if (track) out.sources.push_back(std::move(cell->sources));
  }
  return out;
}

Aabb compute_aabb(const PointCloud& cloud, double padding_fraction) {
  if (cloud.empty()) {
    throw InputError("compute_aabb: empty point cloud");
  }
  if (!(padding_fraction >= 0.0) || !std::isfinite(padding_fraction)) {
    throw InputError("compute_aabb: padding fraction must be >= 0");
  }
  Aabb box{cloud.positions.front(), cloud.positions.front()};
  for (const auto& p : cloud.positions) {
    box.min = box.min.cwiseMin(p);
    box.max = box.max.cwiseMax(p);
  }
  const Eigen::Vector3d pad = padding_fraction * box.extent();
  box.min -= pad;
  box.max += pad;
  box.validate();
  return box;
}

PointCloud random_init(const Aabb& box, std::size_t n, uint64_t seed) {
  box.validate();
  if (n < 1) {
    throw InputError("random_init: point count must be >= 1");
  }
  std::mt19937_64 rng(seed);
  const auto unit = [&rng] { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };
  const Eigen::Vector3d extent = box.extent();

  PointCloud cloud;
  cloud.positions.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double ux = unit();
    const double uy = unit();
    const double uz = unit();
    cloud.positions.emplace_back(box.min.x() + ux * extent.x(), box.min.y() + uy * extent.y(),
                                 box.min.z() + uz * extent.z());
  }
  cloud.colors.assign(n, kMidGray);
  cloud.observations.assign(n, 1u);
  return cloud;
}

std::vector<ColmapPoint3D> cloud_to_colmap(const PointCloud& cloud, uint64_t starting_id) {
  cloud.validate();
  if (!cloud.empty() && cloud.size() - 1 >= kInvalidPoint3DId - starting_id) {
    throw InputError("cloud_to_colmap: point ids overflow");
  }
  std::vector<ColmapPoint3D> points;
  points.reserve(cloud.size());
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    ColmapPoint3D p;
    p.point3D_id = starting_id + i;
    p.xyz = {cloud.positions[i].x(), cloud.positions[i].y(), cloud.positions[i].z()};
    p.rgb = cloud.colors[i];
    p.error = 0.0;
    points.push_back(std::move(p));
  }
  return points;
}

void append_cloud_with_tracks(ColmapModel& model, const PointCloud& cloud, uint64_t starting_id) {
  std::vector<ColmapPoint3D> points = cloud_to_colmap(cloud, starting_id);
  if (cloud.has_sources()) {
    std::unordered_map<uint32_t, std::size_t> image_index;
    for (std::size_t i = 0; i < model.images.size(); ++i) {
      image_index.emplace(model.images[i].image_id, i);
    }
    for (std::size_t i = 0; i < points.size(); ++i) {
      for (const PointSource& s : cloud.sources[i]) {
        auto it = image_index.find(s.image_id);
        if (it == image_index.end()) continue;
        ColmapImage& image = model.images[it->second];
        if (image.points2D.size() >= std::numeric_limits<uint32_t>::max()) {
          throw InputError("append_cloud_with_tracks: too many 2D points in one image");
        }
        const auto idx = static_cast<uint32_t>(image.points2D.size());
        image.points2D.push_back({s.u + 0.5, s.v + 0.5, points[i].point3D_id});
        points[i].track.push_back({s.image_id, idx});
      }
    }
  }
  model.points3D.insert(model.points3D.end(), std::make_move_iterator(points.begin()),
                        std::make_move_iterator(points.end()));
}

}  // namespace splatprep
