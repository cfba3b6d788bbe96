#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "splatprep/camera_model.hpp"
#include "splatprep/colmap_model.hpp"
#include "splatprep/imaging.hpp"

namespace splatprep {

/// Per-view depth in scene units, row-major. A pixel is valid iff its depth
/// is finite and > 0.
struct DepthMap {
  int width = 0;
  int height = 0;
  std::vector<float> depth;

  DepthMap() = default;
  DepthMap(int w, int h, float fill = 0.0f);

  float at(int u, int v) const {
    return depth[static_cast<std::size_t>(v) * static_cast<std::size_t>(width) +
                 static_cast<std::size_t>(u)];
  }
  float& at(int u, int v) {
    return depth[static_cast<std::size_t>(v) * static_cast<std::size_t>(width) +
                 static_cast<std::size_t>(u)];
  }
  static bool is_valid(float d) { return std::isfinite(d) && d > 0.0f; }

  bool operator==(const DepthMap&) const = default;
};

/// The pixel a point was lifted from; used to build COLMAP 2D-3D tracks.
struct PointSource {
  uint32_t image_id = 0;
  uint32_t u = 0;
  uint32_t v = 0;

  bool operator==(const PointSource&) const = default;
};

using Rgb8 = std::array<uint8_t, 3>;

struct PointCloud {
  std::vector<Eigen::Vector3d> positions;
  std::vector<Rgb8> colors;
  std::vector<uint32_t> observations;
  /// Either empty (no provenance tracking) or one list per point.
  std::vector<std::vector<PointSource>> sources;

  std::size_t size() const { return positions.size(); }
  bool empty() const { return positions.empty(); }
  bool has_sources() const { return !sources.empty(); }

  /// Throws InputError if the arrays disagree in length or a position is
  /// not finite.
  void validate() const;

  bool operator==(const PointCloud&) const = default;
};

struct Aabb {
  Eigen::Vector3d min = Eigen::Vector3d::Zero();
  Eigen::Vector3d max = Eigen::Vector3d::Zero();

  Eigen::Vector3d extent() const { return max - min; }
  double diagonal() const { return extent().norm(); }
  bool contains(const Eigen::Vector3d& p) const {
    return (p.array() >= min.array()).all() && (p.array() <= max.array()).all();
  }
  void validate() const;
};

struct BackProjectOptions {
  int stride = 2;
  /// When set, every emitted point records its source pixel under this id.
  std::optional<uint32_t> track_image_id;
};

/// Lifts every valid pixel on the stride grid (u, v multiples of `stride`,
/// row-major) to world space:
///   x_cam   = d * ((u + 0.5 - cx) / fx, (v + 0.5 - cy) / fy, 1)
///   x_world = R^T (x_cam - t)
/// Colors come from `color` at the same pixel (8-bit quantized), or mid-gray
/// when absent. An all-invalid map yields an empty cloud and a logged
/// warning. Throws InputError on dimension mismatches or stride < 1.
PointCloud back_project(const DepthMap& depth, const CameraIntrinsics& k, const Pose& pose,
                        const ImageBuffer* color = nullptr,
                        const BackProjectOptions& options = {});

struct Projection {
  // Continuous image coordinates: pixel (i, j) covers [i, i+1) x [j, j+1).
  double u = 0.0;
  double v = 0.0;
  double depth = 0.0;
};

/// Pinhole forward model u = fx x / z + cx, v = fy y / z + cy; the inverse of
/// back_project, so a point lifted from pixel (i, j) projects to its center
/// (i + 0.5, j + 0.5). Throws InputError if the point is at or behind the
/// camera.
Projection project(const Eigen::Vector3d& world, const CameraIntrinsics& k, const Pose& pose);

struct VoxelKey {
  int64_t x = 0;
  int64_t y = 0;
  int64_t z = 0;

  auto operator<=>(const VoxelKey&) const = default;
};

/// floor(p / voxel_size) per axis. Throws InputError if the index does not
/// fit comfortably in int64.
VoxelKey voxel_key(const Eigen::Vector3d& p, double voxel_size);

/// Groups all points of all clouds by voxel, averages position and color
/// within each cell, and keeps cells with at least `min_obs` points.
///
/// Accumulation order within a cell is (cloud index, point index), and the
/// output is sorted by voxel key, so the result is bit-identical for any
/// `threads` value. Output observations are the per-cell point counts; colors
/// are rounded half away from zero. Source lists, when every input cloud
/// carries them, are concatenated in accumulation order.
PointCloud voxel_fuse(std::span<const PointCloud> clouds, double voxel_size, uint32_t min_obs,
                      unsigned threads = 1);

/// Component-wise bounds, grown on each side by `padding_fraction` of the
/// extent along that axis. Throws InputError on an empty cloud or negative
/// padding.
Aabb compute_aabb(const PointCloud& cloud, double padding_fraction = 0.0);

inline constexpr std::size_t kDefaultRandomInitCount = 100000;
inline constexpr Rgb8 kMidGray{128, 128, 128};

/// `n` points uniform in `box`, mid-gray, one observation each. Draws come
/// from std::mt19937_64 seeded with `seed`, three per point (x, y, z), each
/// mapped to [0, 1) as (draw >> 11) * 2^-53; the output is identical on
/// every conforming platform.
PointCloud random_init(const Aabb& box, std::size_t n = kDefaultRandomInitCount,
                       uint64_t seed = 0);

/// Sequential ids from `starting_id`, error 0, empty tracks, order kept.
/// Throws InputError if the ids would reach the reserved 2^64 - 1.
std::vector<ColmapPoint3D> cloud_to_colmap(const PointCloud& cloud, uint64_t starting_id = 1);

/// Like cloud_to_colmap, but also fills tracks from the cloud's point
/// sources: each source becomes a points2D entry (at the pixel center) of
/// the image with matching id, linked both ways. Sources naming images that
/// are not in the model are skipped. Appends to model.points3D.
void append_cloud_with_tracks(ColmapModel& model, const PointCloud& cloud,
                              uint64_t starting_id = 1);

}  // namespace splatprep
