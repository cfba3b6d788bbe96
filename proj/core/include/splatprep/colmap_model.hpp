#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <limits>
#include <string>
#include <vector>

#include "splatprep/camera_model.hpp"

namespace splatprep {

/// points2D entries with no associated 3D point carry this id, both on disk
/// (binary) and in memory. The text format spells it -1, as COLMAP does.
inline constexpr uint64_t kInvalidPoint3DId = std::numeric_limits<uint64_t>::max();

struct ColmapCamera {
  uint32_t camera_id = 0;
  int32_t model_id = 1;
  uint64_t width = 0;
  uint64_t height = 0;
  std::vector<double> params;  // SIMPLE_PINHOLE: f cx cy; PINHOLE: fx fy cx cy

  bool operator==(const ColmapCamera&) const = default;
};

struct Point2D {
  double x = 0.0;
  double y = 0.0;
  uint64_t point3D_id = kInvalidPoint3DId;

  bool operator==(const Point2D&) const = default;
};

struct ColmapImage {
  uint32_t image_id = 0;
  std::array<double, 4> qvec{1.0, 0.0, 0.0, 0.0};  // w x y z
  std::array<double, 3> tvec{0.0, 0.0, 0.0};
  uint32_t camera_id = 0;
  std::string name;
  std::vector<Point2D> points2D;

  bool operator==(const ColmapImage&) const = default;
};

struct TrackElement {
  uint32_t image_id = 0;
  uint32_t point2D_idx = 0;

  bool operator==(const TrackElement&) const = default;
};

struct ColmapPoint3D {
  uint64_t point3D_id = 0;
  std::array<double, 3> xyz{0.0, 0.0, 0.0};
  std::array<uint8_t, 3> rgb{0, 0, 0};
  double error = 0.0;
  std::vector<TrackElement> track;

  bool operator==(const ColmapPoint3D&) const = default;
};

/// A sparse model. Entries keep their insertion order through every
/// serialization, which makes write(read(write(m))) byte-identical.
struct ColmapModel {
  std::vector<ColmapCamera> cameras;
  std::vector<ColmapImage> images;
  std::vector<ColmapPoint3D> points3D;

  /// Throws InputError on: duplicate ids, params length not matching the
  /// model, unknown model id, images referencing missing cameras, empty
  /// names or names containing NUL/newline, track entries referencing
  /// missing images (checked only when the model has images).
  void validate() const;

  bool operator==(const ColmapModel&) const = default;
};

/// Number of intrinsic parameters for a COLMAP model id, or -1 if this
/// toolkit does not support that model.
int colmap_param_count(int32_t model_id);

/// Writes cameras.bin, images.bin and points3D.bin (little-endian, COLMAP
/// layout) into `dir`, creating it if needed. Each file is written
/// atomically.
void write_binary(const ColmapModel& model, const std::filesystem::path& dir);

/// Reads the three .bin files from `dir`. Throws InputError on truncation,
/// trailing bytes, unknown model ids or invariant violations.
ColmapModel read_binary(const std::filesystem::path& dir);

/// COLMAP text layout with `#` header comments. Doubles are printed in their
/// shortest round-trip form.
void write_text(const ColmapModel& model, const std::filesystem::path& dir);
ColmapModel read_text(const std::filesystem::path& dir);

/// In-memory encoders used by the writers; exposed for byte-level tests.
std::string encode_cameras_bin(const std::vector<ColmapCamera>& cameras);
std::string encode_images_bin(const std::vector<ColmapImage>& images);
std::string encode_points3D_bin(const std::vector<ColmapPoint3D>& points);
std::string encode_points3D_text(const std::vector<ColmapPoint3D>& points);

ColmapCamera to_colmap_camera(const CameraIntrinsics& k, uint32_t camera_id);
CameraIntrinsics to_intrinsics(const ColmapCamera& camera);
Pose image_pose(const ColmapImage& image);

/// Cameras and images for a rig; camera ids are 1 + camera index, image ids
/// 1 + frame index. No 3D points.
ColmapModel rig_to_colmap(const CameraRig& rig);

}  // namespace splatprep
