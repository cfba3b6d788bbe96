#include "splatprep/camera_model.hpp"

#include <cmath>
#include <cstdio>
#include <optional>
#include <set>

#include <Eigen/LU>
#include <nlohmann/json.hpp>

#include "splatprep/error.hpp"

namespace splatprep {

namespace {

using json = nlohmann::json;

constexpr double kUnitQuaternionTol = 1e-9;
constexpr double kJsonRigidTol = 1e-4;

std::string to_string_precise(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

double max_orthonormal_deviation(const Eigen::Matrix3d& r) {
  return (r.transpose() * r - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff();
}

// Intrinsic keys a frame may override; focal keys are handled as a group.
struct IntrinsicsSpec {
  std::optional<double> w, h, fl_x, fl_y, angle_x, angle_y, cx, cy;
};

std::optional<double> get_number(const json& obj, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) {
    return std::nullopt;
  }
  if (!it->is_number()) {
    throw InputError(std::string("camera JSON: '") + key + "' must be a number");
  }
  return it->get<double>();
}

IntrinsicsSpec read_spec(const json& obj) {
  IntrinsicsSpec s;
  s.w = get_number(obj, "w");
  s.h = get_number(obj, "h");
  s.fl_x = get_number(obj, "fl_x");
  s.fl_y = get_number(obj, "fl_y");
  s.angle_x = get_number(obj, "camera_angle_x");
  s.angle_y = get_number(obj, "camera_angle_y");
  s.cx = get_number(obj, "cx");
  s.cy = get_number(obj, "cy");
  return s;
}

bool has_focal(const IntrinsicsSpec& s) {
  return s.fl_x || s.fl_y || s.angle_x || s.angle_y;
}

IntrinsicsSpec merge(const IntrinsicsSpec& global, const IntrinsicsSpec& frame) {
  IntrinsicsSpec m = global;
  if (frame.w) m.w = frame.w;
  if (frame.h) m.h = frame.h;
  if (frame.cx) m.cx = frame.cx;
  if (frame.cy) m.cy = frame.cy;
  if (has_focal(frame)) {
    m.fl_x = frame.fl_x;
    m.fl_y = frame.fl_y;
    m.angle_x = frame.angle_x;
    m.angle_y = frame.angle_y;
  }
  return m;
}

uint64_t to_dimension(double v, const char* what) {
  if (!(v >= 1.0) || v != std::floor(v) || v > 1e9) {
    throw InputError(std::string("camera JSON: '") + what + "' must be a positive integer");
  }
  return static_cast<uint64_t>(v);
}

double focal_from_angle(double extent, double angle, const char* what) {
  if (!(angle > 0.0 && angle < M_PI)) {
    throw InputError(std::string("camera JSON: '") + what + "' must be in (0, pi)");
  }
  return 0.5 * extent / std::tan(0.5 * angle);
}

CameraIntrinsics resolve(const IntrinsicsSpec& s, const std::string& frame_name) {
  if (!s.w || !s.h) {
    throw InputError("camera JSON: frame '" + frame_name + "' has no image size ('w', 'h')");
  }
  CameraIntrinsics k;
  k.width = to_dimension(*s.w, "w");
  k.height = to_dimension(*s.h, "h");
  const double w = static_cast<double>(k.width);
  const double h = static_cast<double>(k.height);

  std::optional<double> fx = s.fl_x;
  std::optional<double> fy = s.fl_y;
  if (!fx && s.angle_x) fx = focal_from_angle(w, *s.angle_x, "camera_angle_x");
  if (!fy && s.angle_y) fy = focal_from_angle(h, *s.angle_y, "camera_angle_y");
  if (!fx && !fy) {
    throw InputError("camera JSON: frame '" + frame_name +
                     "' has no focal specification (fl_x/fl_y or camera_angle_x)");
  }
  k.fx = fx ? *fx : *fy;
  k.fy = fy ? *fy : *fx;
  k.cx = s.cx ? *s.cx : 0.5 * w;
  k.cy = s.cy ? *s.cy : 0.5 * h;
  k.model = k.fx == k.fy ? CameraModelType::kSimplePinhole : CameraModelType::kPinhole;
  k.validate();
  return k;
}

Eigen::Matrix4d read_matrix(const json& frame, const std::string& name) {
  auto it = frame.find("transform_matrix");
  if (it == frame.end() || !it->is_array() || it->size() != 4) {
    throw InputError("camera JSON: frame '" + name + "' needs a 4x4 'transform_matrix'");
  }
  Eigen::Matrix4d m;
  for (int r = 0; r < 4; ++r) {
    const json& row = (*it)[static_cast<std::size_t>(r)];
    if (!row.is_array() || row.size() != 4) {
      throw InputError("camera JSON: frame '" + name + "' needs a 4x4 'transform_matrix'");
    }
    for (int c = 0; c < 4; ++c) {
      const json& v = row[static_cast<std::size_t>(c)];
      if (!v.is_number()) {
        throw InputError("camera JSON: frame '" + name + "' transform_matrix has a non-number");
      }
      m(r, c) = v.get<double>();
    }
  }
  if (!m.allFinite()) {
    throw InputError("camera JSON: frame '" + name + "' transform_matrix is not finite");
  }
  return m;
}

std::string normalize_name(std::string name) {
  while (name.rfind("./", 0) == 0) {
    name.erase(0, 2);
  }
  return name;
}

}  // namespace

std::string_view camera_model_name(CameraModelType model) {
  switch (model) {
    case CameraModelType::kSimplePinhole:
      return "SIMPLE_PINHOLE";
    case CameraModelType::kPinhole:
      return "PINHOLE";
  }
  return "UNKNOWN";
}

void CameraIntrinsics::validate() const {
  if (model != CameraModelType::kSimplePinhole && model != CameraModelType::kPinhole) {
    throw InputError("intrinsics: unsupported camera model");
  }
  if (width == 0 || height == 0) {
    throw InputError("intrinsics: width and height must be positive");
  }
  if (!(fx > 0.0) || !(fy > 0.0) || !std::isfinite(fx) || !std::isfinite(fy)) {
    throw InputError("intrinsics: focal lengths must be positive and finite");
  }
  if (!(cx >= 0.0 && cx <= static_cast<double>(width))) {
    throw InputError("intrinsics: cx = " + to_string_precise(cx) + " outside [0, width]");
  }
  if (!(cy >= 0.0 && cy <= static_cast<double>(height))) {
    throw InputError("intrinsics: cy = " + to_string_precise(cy) + " outside [0, height]");
  }
  if (model == CameraModelType::kSimplePinhole && fx != fy) {
    throw InputError("intrinsics: SIMPLE_PINHOLE requires fx == fy");
  }
}

Eigen::Matrix3d Pose::rotation() const { return quaternion_to_rotation(qvec); }

Eigen::Vector3d Pose::to_camera(const Eigen::Vector3d& world) const {
  return rotation() * world + tvec;
}

Eigen::Vector3d Pose::to_world(const Eigen::Vector3d& cam) const {
  return rotation().transpose() * (cam - tvec);
}

Eigen::Vector3d Pose::center() const { return -(rotation().transpose() * tvec); }

void Pose::validate() const {
  if (!qvec.allFinite() || !tvec.allFinite()) {
    throw InputError("pose: non-finite component");
  }
  if (std::abs(qvec.norm() - 1.0) > kUnitQuaternionTol) {
    throw InputError("pose: quaternion is not unit norm");
  }
  if (canonicalize_quaternion(qvec) != qvec) {
    throw InputError("pose: quaternion is not in canonical sign");
  }
}

Eigen::Vector4d canonicalize_quaternion(const Eigen::Vector4d& q) {
  for (int i = 0; i < 4; ++i) {
    if (q[i] > 0.0) return q;
    if (q[i] < 0.0) return -q;
  }
  return q;
}

Eigen::Matrix3d quaternion_to_rotation(const Eigen::Vector4d& q) {
  const double w = q[0], x = q[1], y = q[2], z = q[3];
  Eigen::Matrix3d r;
  r << 1.0 - 2.0 * (y * y + z * z), 2.0 * (x * y - w * z), 2.0 * (x * z + w * y),
      2.0 * (x * y + w * z), 1.0 - 2.0 * (x * x + z * z), 2.0 * (y * z - w * x),
      2.0 * (x * z - w * y), 2.0 * (y * z + w * x), 1.0 - 2.0 * (x * x + y * y);
  return r;
}

Eigen::Vector4d rotation_to_quaternion(const Eigen::Matrix3d& m) {
  Eigen::Vector4d q;
  const double trace = m(0, 0) + m(1, 1) + m(2, 2);
  if (trace > 0.0) {
    const double s = 2.0 * std::sqrt(trace + 1.0);
    q << 0.25 * s, (m(2, 1) - m(1, 2)) / s, (m(0, 2) - m(2, 0)) / s, (m(1, 0) - m(0, 1)) / s;
  } else if (m(0, 0) > m(1, 1) && m(0, 0) > m(2, 2)) {
    const double s = 2.0 * std::sqrt(1.0 + m(0, 0) - m(1, 1) - m(2, 2));
    q << (m(2, 1) - m(1, 2)) / s, 0.25 * s, (m(0, 1) + m(1, 0)) / s, (m(0, 2) + m(2, 0)) / s;
  } else if (m(1, 1) > m(2, 2)) {
    const double s = 2.0 * std::sqrt(1.0 + m(1, 1) - m(0, 0) - m(2, 2));
    q << (m(0, 2) - m(2, 0)) / s, (m(0, 1) + m(1, 0)) / s, 0.25 * s, (m(1, 2) + m(2, 1)) / s;
  } else {
    const double s = 2.0 * std::sqrt(1.0 + m(2, 2) - m(0, 0) - m(1, 1));
    q << (m(1, 0) - m(0, 1)) / s, (m(0, 2) + m(2, 0)) / s, (m(1, 2) + m(2, 1)) / s, 0.25 * s;
  }
  return canonicalize_quaternion(q / q.norm());
}

Eigen::Matrix4d pose_to_matrix(const Pose& pose) {
  Eigen::Matrix4d m = Eigen::Matrix4d::Identity();
  m.topLeftCorner<3, 3>() = pose.rotation();
  m.topRightCorner<3, 1>() = pose.tvec;
  return m;
}

Pose matrix_to_pose(const Eigen::Matrix4d& m, double orthonormal_tol) {
  if (!m.allFinite()) {
    throw InputError("transform is not finite");
  }
  const Eigen::Matrix3d r = m.topLeftCorner<3, 3>();
  if (r.determinant() < 0.0) {
    throw InputError("transform rotation block is a reflection (det < 0)");
  }
  const double dev = max_orthonormal_deviation(r);
  if (dev > orthonormal_tol) {
    throw InputError("transform rotation block is not orthonormal (deviation " +
                     to_string_precise(dev) + ")");
  }
  Pose pose;
  pose.qvec = rotation_to_quaternion(r);
  pose.tvec = m.topRightCorner<3, 1>();
  return pose;
}

PoseConvention parse_pose_convention(std::string_view tag) {
  if (tag == "opengl_c2w") return PoseConvention::kOpenGlCameraToWorld;
  if (tag == "opencv_c2w") return PoseConvention::kOpenCvCameraToWorld;
  if (tag == "opencv_w2c") return PoseConvention::kOpenCvWorldToCamera;
  throw InputError("unknown camera convention '" + std::string(tag) +
                   "' (expected opengl_c2w, opencv_c2w or opencv_w2c)");
}

std::string_view pose_convention_name(PoseConvention convention) {
  switch (convention) {
    case PoseConvention::kOpenGlCameraToWorld:
      return "opengl_c2w";
    case PoseConvention::kOpenCvCameraToWorld:
      return "opencv_c2w";
    case PoseConvention::kOpenCvWorldToCamera:
      return "opencv_w2c";
  }
  return "unknown";
}

Pose convert_transform(const Eigen::Matrix4d& m, PoseConvention convention) {
  if (!m.allFinite()) {
    throw InputError("transform is not finite");
  }
  if (m.row(3).head<3>().cwiseAbs().maxCoeff() > 1e-9 || std::abs(m(3, 3) - 1.0) > 1e-9) {
    throw InputError("transform is not affine (last row must be 0 0 0 1)");
  }
  if (convention == PoseConvention::kOpenCvWorldToCamera) {
    return matrix_to_pose(m, kJsonRigidTol);
  }

  Eigen::Matrix3d c2w = m.topLeftCorner<3, 3>();
  if (convention == PoseConvention::kOpenGlCameraToWorld) {
    c2w.col(1) = -c2w.col(1);
    c2w.col(2) = -c2w.col(2);
  }
  if (c2w.determinant() < 0.0) {
    throw InputError("transform rotation block is a reflection (det < 0)");
  }
  if (max_orthonormal_deviation(c2w) > kJsonRigidTol) {
    throw InputError("transform rotation block is not orthonormal within 1e-4");
  }
  Pose pose;
  pose.qvec = rotation_to_quaternion(c2w.transpose());
  pose.tvec = -(pose.rotation() * m.topRightCorner<3, 1>());
  return pose;
}

void CameraRig::validate() const {
  std::set<std::string_view> names;
  for (const auto& k : cameras) {
    k.validate();
  }
  for (const auto& f : frames) {
    if (f.name.empty()) {
      throw InputError("rig: empty frame name");
    }
    if (!names.insert(f.name).second) {
      throw InputError("rig: duplicate frame name '" + f.name + "'");
    }
    if (f.camera_index >= cameras.size()) {
      throw InputError("rig: frame '" + f.name + "' references a missing camera");
    }
    f.pose.validate();
  }
}

CameraRig parse_camera_json(std::string_view document, PoseConvention convention) {
  json doc;
  try {
    doc = json::parse(document);
  } catch (const json::parse_error& e) {
    throw InputError(std::string("camera JSON: parse error: ") + e.what());
  }
  if (!doc.is_object()) {
    throw InputError("camera JSON: top level must be an object");
  }
  auto frames_it = doc.find("frames");
  if (frames_it == doc.end() || !frames_it->is_array()) {
    throw InputError("camera JSON: missing 'frames' array");
  }

  const IntrinsicsSpec global = read_spec(doc);
  CameraRig rig;
  std::size_t index = 0;
  for (const json& frame : *frames_it) {
    if (!frame.is_object()) {
      throw InputError("camera JSON: frame " + std::to_string(index) + " is not an object");
    }
    std::string name;
    if (auto it = frame.find("file_path"); it != frame.end() && it->is_string()) {
      name = normalize_name(it->get<std::string>());
    }
    if (name.empty()) {
      throw InputError("camera JSON: frame " + std::to_string(index) + " has no 'file_path'");
    }

    const CameraIntrinsics k = resolve(merge(global, read_spec(frame)), name);
    std::size_t cam = 0;
    while (cam < rig.cameras.size() && !(rig.cameras[cam] == k)) ++cam;
    if (cam == rig.cameras.size()) rig.cameras.push_back(k);

    Pose pose;
    try {
      pose = convert_transform(read_matrix(frame, name), convention);
    } catch (const InputError& e) {
      throw InputError("camera JSON: frame '" + name + "': " + e.what());
    }
    rig.frames.push_back({std::move(name), cam, pose});
    ++index;
  }
  rig.validate();
  return rig;
}

}  // namespace splatprep
