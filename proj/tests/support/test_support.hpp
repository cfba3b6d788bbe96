// Shared fixtures for unit and acceptance tests: temp directories, random
// generators, and a synthetic two-view scene with analytic depth.
#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "splatprep/camera_model.hpp"
#include "splatprep/colmap_model.hpp"
#include "splatprep/geometry.hpp"
#include "splatprep/imaging.hpp"

namespace splatprep::testing {

class TempDir {
 public:
  explicit TempDir(const std::string& tag = "splatprep");
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

using Rng = std::mt19937_64;

double uniform(Rng& rng, double lo, double hi);
int uniform_int(Rng& rng, int lo, int hi);  // inclusive

Eigen::Vector4d random_unit_quaternion(Rng& rng);
Pose random_pose(Rng& rng, double translation_range = 5.0);
CameraIntrinsics random_intrinsics(Rng& rng);

/// Samples uniform in [0, 1].
ImageBuffer random_image(Rng& rng, int width, int height);
/// Samples on the 8-bit grid k / 255, so PNG round trips are lossless.
ImageBuffer random_image_u8(Rng& rng, int width, int height);

/// Random but internally consistent model: tracks and points2D reference
/// each other, names are unique, and parameters use full double precision.
ColmapModel random_model(Rng& rng, std::size_t max_points, std::size_t max_images);

PointCloud random_cloud(Rng& rng, std::size_t n, double extent);

std::string read_bytes(const std::filesystem::path& path);

/// Tilted textured plane seen by two pinhole cameras. Depth is analytic:
/// pixels whose ray hits the rectangle get the exact camera-space depth,
/// all others are invalid (0).
struct PlaneScene {
  // Plane n . X = offset, rectangle bounds on world x/y.
  Eigen::Vector3d normal{-0.2, 0.0, 1.0};
  double offset = 5.0;
  double x_min = -1.0, x_max = 1.0, y_min = -0.75, y_max = 0.75;

  CameraIntrinsics intrinsics;
  std::vector<Pose> poses;
  std::vector<std::string> names;

  bool on_rectangle(const Eigen::Vector3d& world, double tol) const;
  DepthMap depth(std::size_t view) const;
  ImageBuffer color(std::size_t view) const;
  /// transforms.json text in the OpenGL camera-to-world convention.
  std::string transforms_json() const;

  /// Writes transforms.json, depth/<stem>.pfm and images/<name> under root.
  void write(const std::filesystem::path& root) const;
};

PlaneScene make_plane_scene(int width = 64, int height = 48);

}  // namespace splatprep::testing
