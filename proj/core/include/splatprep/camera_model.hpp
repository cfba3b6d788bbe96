#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

namespace splatprep {

enum class CameraModelType : int32_t {
  kSimplePinhole = 0,
  kPinhole = 1,
};

std::string_view camera_model_name(CameraModelType model);

/// Pinhole intrinsics in pixels. Pixel (u, v) covers [u, u+1) x [v, v+1), so
/// its center sits at (u + 0.5, v + 0.5), the same convention COLMAP uses.
struct CameraIntrinsics {
  CameraModelType model = CameraModelType::kPinhole;
  uint64_t width = 0;
  uint64_t height = 0;
  double fx = 0.0;
  double fy = 0.0;
  double cx = 0.0;
  double cy = 0.0;

  /// Throws InputError naming the first violated constraint.
  void validate() const;

  bool operator==(const CameraIntrinsics&) const = default;
};

/// Rigid world-to-camera transform, x_cam = R * x_world + t, with R stored as
/// a unit quaternion (w, x, y, z) in canonical sign (w > 0, or w == 0 and the
/// first non-zero of x, y, z positive).
struct Pose {
  Eigen::Vector4d qvec{1.0, 0.0, 0.0, 0.0};
  Eigen::Vector3d tvec = Eigen::Vector3d::Zero();

  Eigen::Matrix3d rotation() const;
  Eigen::Vector3d to_camera(const Eigen::Vector3d& world) const;
  Eigen::Vector3d to_world(const Eigen::Vector3d& cam) const;
  /// Camera center in world coordinates, -R^T t.
  Eigen::Vector3d center() const;

  /// Throws InputError if the quaternion is not unit-norm within 1e-9 or not
  /// in canonical sign.
  void validate() const;

  bool operator==(const Pose&) const = default;
};

/// Returns q or -q, whichever is in canonical sign.
Eigen::Vector4d canonicalize_quaternion(const Eigen::Vector4d& q);

Eigen::Matrix3d quaternion_to_rotation(const Eigen::Vector4d& q);

/// Shepperd's method; the result is normalized and canonicalized. The input
/// must already be a rotation; see matrix_to_pose for the checked variant.
Eigen::Vector4d rotation_to_quaternion(const Eigen::Matrix3d& r);

Eigen::Matrix4d pose_to_matrix(const Pose& pose);

/// Inverse of pose_to_matrix. Throws InputError when the rotation block is
/// a reflection (det < 0) or deviates from orthonormal by more than
/// `orthonormal_tol` in any entry of R^T R - I.
Pose matrix_to_pose(const Eigen::Matrix4d& m, double orthonormal_tol = 1e-6);

/// Axis convention of the 4x4 matrices in a camera JSON document.
enum class PoseConvention {
  kOpenGlCameraToWorld,  // "opengl_c2w": camera looks down -z, y up
  kOpenCvCameraToWorld,  // "opencv_c2w": camera looks down +z, y down
  kOpenCvWorldToCamera,  // "opencv_w2c": already COLMAP-style
};

/// Parses "opengl_c2w" | "opencv_c2w" | "opencv_w2c"; InputError otherwise.
PoseConvention parse_pose_convention(std::string_view tag);
std::string_view pose_convention_name(PoseConvention convention);

struct RigFrame {
  std::string name;
  std::size_t camera_index = 0;
  Pose pose;
};

/// Frames with their (possibly shared) intrinsics.
struct CameraRig {
  std::vector<CameraIntrinsics> cameras;
  std::vector<RigFrame> frames;

  void validate() const;
};

/// Parses a transforms.json-style camera document:
///
///   { "w": 1920, "h": 1080, "fl_x": ..., "fl_y": ..., "cx": ..., "cy": ...,
///     "camera_angle_x": ...,
///     "frames": [ { "file_path": "images/0001.png",
///                   "transform_matrix": [[...], [...], [...], [...]] }, ... ] }
///
/// Intrinsics may sit at the top level, in a frame, or both; frame values win
/// key by key, except that a frame's focal specification (fl_x / fl_y /
/// camera_angle_x / camera_angle_y) replaces the global one as a whole. A
/// horizontal field of view resolves to fx = 0.5 * w / tan(0.5 * angle); fy
/// defaults to fx and cx, cy default to the image center. Frames with equal
/// intrinsics share one camera entry. Leading "./" is stripped from frame
/// names.
///
/// Throws InputError on malformed JSON, missing focal specification, or a
/// rotation block that is not orthonormal within 1e-4 (or is a reflection).
CameraRig parse_camera_json(std::string_view document, PoseConvention convention);

/// Converts one transform_matrix from `convention` to a COLMAP pose.
Pose convert_transform(const Eigen::Matrix4d& m, PoseConvention convention);

}  // namespace splatprep
