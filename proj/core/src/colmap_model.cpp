#include "splatprep/colmap_model.hpp"

#include <bit>
#include <charconv>
#include <cstring>
#include <sstream>
#include <string_view>
#include <unordered_set>

#include "splatprep/error.hpp"
#include "splatprep/file_util.hpp"

namespace splatprep {

namespace fs = std::filesystem;

namespace {

// ---------------------------------------------------------------------------
//  Little-endian byte encoding
// ---------------------------------------------------------------------------

class ByteWriter {
 public:
  template <typename T>
  void put(T value) {
    static_assert(std::is_integral_v<T> || std::is_floating_point_v<T>);
    using U = std::make_unsigned_t<
        std::conditional_t<std::is_floating_point_v<T>,
                           std::conditional_t<sizeof(T) == 8, uint64_t, uint32_t>, T>>;
    U bits;
    if constexpr (std::is_floating_point_v<T>) {
      bits = std::bit_cast<U>(value);
    } else {
      bits = static_cast<U>(value);
    }
    for (std::size_t i = 0; i < sizeof(U); ++i) {
      out_.push_back(static_cast<char>((bits >> (8 * i)) & 0xFFu));
    }
  }

  void put_cstring(const std::string& s) {
    out_.append(s);
    out_.push_back('\0');
  }

  std::string take() { return std::move(out_); }

 private:
  std::string out_;
};

class ByteReader {
 public:
  ByteReader(std::string_view data, std::string file) : data_(data), file_(std::move(file)) {}

  template <typename T>
  T get() {
    using U = std::make_unsigned_t<
        std::conditional_t<std::is_floating_point_v<T>,
                           std::conditional_t<sizeof(T) == 8, uint64_t, uint32_t>, T>>;
    require(sizeof(U));
    U bits = 0;
    for (std::size_t i = 0; i < sizeof(U); ++i) {
      bits |= static_cast<U>(static_cast<unsigned char>(data_[pos_ + i])) << (8 * i);
    }
    pos_ += sizeof(U);
    if constexpr (std::is_floating_point_v<T>) {
      return std::bit_cast<T>(bits);
    } else {
      return static_cast<T>(bits);
    }
  }

  std::string get_cstring() {
    const auto end = data_.find('\0', pos_);
    if (end == std::string_view::npos) {
      throw InputError(file_ + ": truncated (unterminated string)");
    }
    std::string s(data_.substr(pos_, end - pos_));
    pos_ = end + 1;
    return s;
  }

  // Guards a declared element count against the bytes actually present, so
  // a corrupt count cannot trigger a huge allocation.
  uint64_t get_count(std::size_t min_record_bytes) {
    const auto n = get<uint64_t>();
    if (min_record_bytes > 0 && n > remaining() / min_record_bytes) {
      throw InputError(file_ + ": truncated (count " + std::to_string(n) +
                       " exceeds remaining data)");
    }
    return n;
  }

  std::size_t remaining() const { return data_.size() - pos_; }

  void expect_end() const {
    if (pos_ != data_.size()) {
      throw InputError(file_ + ": count mismatch (" + std::to_string(remaining()) +
                       " trailing bytes)");
    }
  }

 private:
  void require(std::size_t n) const {
    if (data_.size() - pos_ < n) {
      throw InputError(file_ + ": truncated");
    }
  }

  std::string_view data_;
  std::string file_;
  std::size_t pos_ = 0;
};

// ---------------------------------------------------------------------------
//  Text helpers
// ---------------------------------------------------------------------------

void append_double(std::string& out, double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  out.append(buf, res.ptr);
}

template <typename T>
void append_int(std::string& out, T v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  out.append(buf, res.ptr);
}

class LineTokens {
 public:
  LineTokens(std::string_view line, std::string where) : line_(line), where_(std::move(where)) {}

  bool at_end() {
    skip_spaces();
    return pos_ >= line_.size();
  }

  std::string_view next() {
    skip_spaces();
    if (pos_ >= line_.size()) {
      throw InputError(where_ + ": missing field");
    }
    const auto start = pos_;
    while (pos_ < line_.size() && line_[pos_] != ' ' && line_[pos_] != '\t') ++pos_;
    return line_.substr(start, pos_ - start);
  }

  template <typename T>
  T number() {
    const std::string_view tok = next();
    T v{};
    const auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (res.ec != std::errc() || res.ptr != tok.data() + tok.size()) {
      throw InputError(where_ + ": bad number '" + std::string(tok) + "'");
    }
    return v;
  }

  // Everything after the single separator following the last token.
  std::string rest() {
    if (pos_ < line_.size() && line_[pos_] == ' ') ++pos_;
    return std::string(line_.substr(pos_));
  }

 private:
  void skip_spaces() {
    while (pos_ < line_.size() && (line_[pos_] == ' ' || line_[pos_] == '\t')) ++pos_;
  }

  std::string_view line_;
  std::string where_;
  std::size_t pos_ = 0;
};

// Splits into lines, dropping a trailing '\r' from each.
std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start < text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.push_back(line);
    start = end + 1;
  }
  return lines;
}

bool is_skippable(std::string_view line) {
  return line.empty() || line.front() == '#';
}

int32_t model_id_from_name(std::string_view name, const std::string& where) {
  if (name == "SIMPLE_PINHOLE") return 0;
  if (name == "PINHOLE") return 1;
  throw InputError(where + ": unsupported camera model '" + std::string(name) + "'");
}

std::string model_name_from_id(int32_t id) {
  return std::string(camera_model_name(static_cast<CameraModelType>(id)));
}

}  // namespace

int colmap_param_count(int32_t model_id) {
  switch (model_id) {
    case 0:
      return 3;
    case 1:
      return 4;
    default:
      return -1;
  }
}

void ColmapModel::validate() const {
  std::unordered_set<uint32_t> camera_ids;
  for (const auto& c : cameras) {
    if (!camera_ids.insert(c.camera_id).second) {
      throw InputError("model: duplicate camera id " + std::to_string(c.camera_id));
    }
    const int n = colmap_param_count(c.model_id);
    if (n < 0) {
      throw InputError("model: unknown camera model id " + std::to_string(c.model_id));
    }
    if (c.params.size() != static_cast<std::size_t>(n)) {
      throw InputError("model: camera " + std::to_string(c.camera_id) + " has " +
                       std::to_string(c.params.size()) + " params, model needs " +
                       std::to_string(n));
    }
  }
  std::unordered_set<uint32_t> image_ids;
  for (const auto& im : images) {
    if (!image_ids.insert(im.image_id).second) {
      throw InputError("model: duplicate image id " + std::to_string(im.image_id));
    }
    if (!camera_ids.contains(im.camera_id)) {
      throw InputError("model: image " + std::to_string(im.image_id) +
                       " references missing camera " + std::to_string(im.camera_id));
    }
    if (im.name.empty() || im.name.find('\0') != std::string::npos ||
        im.name.find('\n') != std::string::npos) {
      throw InputError("model: image " + std::to_string(im.image_id) + " has an invalid name");
    }
  }
  std::unordered_set<uint64_t> point_ids;
  for (const auto& p : points3D) {
    if (p.point3D_id == kInvalidPoint3DId) {
      throw InputError("model: point id 2^64-1 is reserved");
    }
    if (!point_ids.insert(p.point3D_id).second) {
      throw InputError("model: duplicate point id " + std::to_string(p.point3D_id));
    }
    if (!images.empty()) {
      for (const auto& t : p.track) {
        if (!image_ids.contains(t.image_id)) {
          throw InputError("model: point " + std::to_string(p.point3D_id) +
                           " track references missing image " + std::to_string(t.image_id));
        }
      }
    }
  }
}

// ---------------------------------------------------------------------------
//  Binary
// ---------------------------------------------------------------------------

std::string encode_cameras_bin(const std::vector<ColmapCamera>& cameras) {
  ByteWriter w;
  w.put<uint64_t>(cameras.size());
  for (const auto& c : cameras) {
    w.put<uint32_t>(c.camera_id);
    w.put<int32_t>(c.model_id);
    w.put<uint64_t>(c.width);
    w.put<uint64_t>(c.height);
    for (double p : c.params) w.put<double>(p);
  }
  return w.take();
}

std::string encode_images_bin(const std::vector<ColmapImage>& images) {
  ByteWriter w;
  w.put<uint64_t>(images.size());
  for (const auto& im : images) {
    w.put<uint32_t>(im.image_id);
    for (double q : im.qvec) w.put<double>(q);
    for (double t : im.tvec) w.put<double>(t);
    w.put<uint32_t>(im.camera_id);
    w.put_cstring(im.name);
    w.put<uint64_t>(im.points2D.size());
    for (const auto& p : im.points2D) {
      w.put<double>(p.x);
      w.put<double>(p.y);
      w.put<uint64_t>(p.point3D_id);
    }
  }
  return w.take();
}

std::string encode_points3D_bin(const std::vector<ColmapPoint3D>& points) {
  ByteWriter w;
  w.put<uint64_t>(points.size());
  for (const auto& p : points) {
    w.put<uint64_t>(p.point3D_id);
    for (double x : p.xyz) w.put<double>(x);
    for (uint8_t c : p.rgb) w.put<uint8_t>(c);
    w.put<double>(p.error);
    w.put<uint64_t>(p.track.size());
    for (const auto& t : p.track) {
      w.put<uint32_t>(t.image_id);
      w.put<uint32_t>(t.point2D_idx);
    }
  }
  return w.take();
}

void write_binary(const ColmapModel& model, const fs::path& dir) {
  model.validate();
  ensure_directory(dir);
  write_file_atomic(dir / "cameras.bin", encode_cameras_bin(model.cameras));
  write_file_atomic(dir / "images.bin", encode_images_bin(model.images));
  write_file_atomic(dir / "points3D.bin", encode_points3D_bin(model.points3D));
}

ColmapModel read_binary(const fs::path& dir) {
  ColmapModel model;

  {
    const std::string data = read_file(dir / "cameras.bin");
    ByteReader r(data, "cameras.bin");
    const uint64_t n = r.get_count(4 + 4 + 8 + 8);
    model.cameras.reserve(n);
    for (uint64_t i = 0; i < n; ++i) {
      ColmapCamera c;
      c.camera_id = r.get<uint32_t>();
      c.model_id = r.get<int32_t>();
      const int np = colmap_param_count(c.model_id);
      if (np < 0) {
        throw InputError("cameras.bin: unknown model_id " + std::to_string(c.model_id));
      }
      c.width = r.get<uint64_t>();
      c.height = r.get<uint64_t>();
      c.params.resize(static_cast<std::size_t>(np));
      for (double& p : c.params) p = r.get<double>();
      model.cameras.push_back(std::move(c));
    }
    r.expect_end();
  }

  {
    const std::string data = read_file(dir / "images.bin");
    ByteReader r(data, "images.bin");
    const uint64_t n = r.get_count(4 + 7 * 8 + 4 + 1 + 8);
    model.images.reserve(n);
    for (uint64_t i = 0; i < n; ++i) {
      ColmapImage im;
      im.image_id = r.get<uint32_t>();
      for (double& q : im.qvec) q = r.get<double>();
      for (double& t : im.tvec) t = r.get<double>();
      im.camera_id = r.get<uint32_t>();
      im.name = r.get_cstring();
      const uint64_t np = r.get_count(8 + 8 + 8);
      im.points2D.resize(np);
      for (auto& p : im.points2D) {
        p.x = r.get<double>();
        p.y = r.get<double>();
        p.point3D_id = r.get<uint64_t>();
      }
      model.images.push_back(std::move(im));
    }
    r.expect_end();
  }

  {
    const std::string data = read_file(dir / "points3D.bin");
    ByteReader r(data, "points3D.bin");
    const uint64_t n = r.get_count(8 + 3 * 8 + 3 + 8 + 8);
    model.points3D.reserve(n);
    for (uint64_t i = 0; i < n; ++i) {
      ColmapPoint3D p;
      p.point3D_id = r.get<uint64_t>();
      for (double& x : p.xyz) x = r.get<double>();
      for (uint8_t& c : p.rgb) c = r.get<uint8_t>();
      p.error = r.get<double>();
      const uint64_t nt = r.get_count(4 + 4);
      p.track.resize(nt);
      for (auto& t : p.track) {
        t.image_id = r.get<uint32_t>();
        t.point2D_idx = r.get<uint32_t>();
      }
      model.points3D.push_back(std::move(p));
    }
    r.expect_end();
  }

  model.validate();
  return model;
}

// ---------------------------------------------------------------------------
//  Text
// ---------------------------------------------------------------------------

std::string encode_points3D_text(const std::vector<ColmapPoint3D>& points) {
  std::size_t track_total = 0;
  for (const auto& p : points) track_total += p.track.size();

  std::string out;
  out += "# 3D point list with one line of data per point:\n";
  out += "#   POINT3D_ID, X, Y, Z, R, G, B, ERROR, TRACK[] as (IMAGE_ID, POINT2D_IDX)\n";
  out += "# Number of points: ";
  append_int(out, points.size());
  out += ", mean track length: ";
  append_double(out, points.empty() ? 0.0
                                    : static_cast<double>(track_total) /
                                          static_cast<double>(points.size()));
  out += '\n';
  for (const auto& p : points) {
    append_int(out, p.point3D_id);
    for (double x : p.xyz) {
      out += ' ';
      append_double(out, x);
    }
    for (uint8_t c : p.rgb) {
      out += ' ';
      append_int(out, static_cast<unsigned>(c));
    }
    out += ' ';
    append_double(out, p.error);
    for (const auto& t : p.track) {
      out += ' ';
      append_int(out, t.image_id);
      out += ' ';
      append_int(out, t.point2D_idx);
    }
    out += '\n';
  }
  return out;
}

void write_text(const ColmapModel& model, const fs::path& dir) {
  model.validate();
  ensure_directory(dir);

  std::string cams;
  cams += "# Camera list with one line of data per camera:\n";
  cams += "#   CAMERA_ID, MODEL, WIDTH, HEIGHT, PARAMS[]\n";
  cams += "# Number of cameras: ";
  append_int(cams, model.cameras.size());
  cams += '\n';
  for (const auto& c : model.cameras) {
    append_int(cams, c.camera_id);
    cams += ' ';
    cams += model_name_from_id(c.model_id);
    cams += ' ';
    append_int(cams, c.width);
    cams += ' ';
    append_int(cams, c.height);
    for (double p : c.params) {
      cams += ' ';
      append_double(cams, p);
    }
    cams += '\n';
  }

  std::size_t observations = 0;
  for (const auto& im : model.images) {
    for (const auto& p : im.points2D) {
      if (p.point3D_id != kInvalidPoint3DId) ++observations;
    }
  }
  std::string imgs;
  imgs += "# Image list with two lines of data per image:\n";
  imgs += "#   IMAGE_ID, QW, QX, QY, QZ, TX, TY, TZ, CAMERA_ID, NAME\n";
  imgs += "#   POINTS2D[] as (X, Y, POINT3D_ID)\n";
  imgs += "# Number of images: ";
  append_int(imgs, model.images.size());
  imgs += ", mean observations per image: ";
  append_double(imgs, model.images.empty() ? 0.0
                                           : static_cast<double>(observations) /
                                                 static_cast<double>(model.images.size()));
  imgs += '\n';
  for (const auto& im : model.images) {
    append_int(imgs, im.image_id);
    for (double q : im.qvec) {
      imgs += ' ';
      append_double(imgs, q);
    }
    for (double t : im.tvec) {
      imgs += ' ';
      append_double(imgs, t);
    }
    imgs += ' ';
    append_int(imgs, im.camera_id);
    imgs += ' ';
    imgs += im.name;
    imgs += '\n';
    bool first = true;
    for (const auto& p : im.points2D) {
      if (!first) imgs += ' ';
      first = false;
      append_double(imgs, p.x);
      imgs += ' ';
      append_double(imgs, p.y);
      imgs += ' ';
      if (p.point3D_id == kInvalidPoint3DId) {
        imgs += "-1";
      } else {
        append_int(imgs, p.point3D_id);
      }
    }
    imgs += '\n';
  }

  write_file_atomic(dir / "cameras.txt", cams);
  write_file_atomic(dir / "images.txt", imgs);
  write_file_atomic(dir / "points3D.txt", encode_points3D_text(model.points3D));
}

ColmapModel read_text(const fs::path& dir) {
  ColmapModel model;

  {
    const std::string data = read_file(dir / "cameras.txt");
    std::size_t line_no = 0;
    for (std::string_view line : split_lines(data)) {
      ++line_no;
      if (is_skippable(line)) continue;
      LineTokens tok(line, "cameras.txt:" + std::to_string(line_no));
      ColmapCamera c;
      c.camera_id = tok.number<uint32_t>();
      c.model_id = model_id_from_name(tok.next(), "cameras.txt:" + std::to_string(line_no));
      c.width = tok.number<uint64_t>();
      c.height = tok.number<uint64_t>();
      c.params.resize(static_cast<std::size_t>(colmap_param_count(c.model_id)));
      for (double& p : c.params) p = tok.number<double>();
      if (!tok.at_end()) {
        throw InputError("cameras.txt:" + std::to_string(line_no) + ": too many params");
      }
      model.cameras.push_back(std::move(c));
    }
  }

  {
    const std::string data = read_file(dir / "images.txt");
    const auto lines = split_lines(data);
    for (std::size_t i = 0; i < lines.size(); ++i) {
      if (is_skippable(lines[i])) continue;
      const std::string where = "images.txt:" + std::to_string(i + 1);
      LineTokens tok(lines[i], where);
      ColmapImage im;
      im.image_id = tok.number<uint32_t>();
      for (double& q : im.qvec) q = tok.number<double>();
      for (double& t : im.tvec) t = tok.number<double>();
      im.camera_id = tok.number<uint32_t>();
      im.name = tok.rest();
      // The points2D line always follows, even when empty.
      ++i;
      if (i < lines.size()) {
        LineTokens pts(lines[i], "images.txt:" + std::to_string(i + 1));
        while (!pts.at_end()) {
          Point2D p;
          p.x = pts.number<double>();
          p.y = pts.number<double>();
          const std::string_view id = pts.next();
          if (id == "-1") {
            p.point3D_id = kInvalidPoint3DId;
          } else {
            const auto res = std::from_chars(id.data(), id.data() + id.size(), p.point3D_id);
            if (res.ec != std::errc() || res.ptr != id.data() + id.size()) {
              throw InputError("images.txt:" + std::to_string(i + 1) + ": bad point3D id");
            }
          }
          im.points2D.push_back(p);
        }
      }
      model.images.push_back(std::move(im));
    }
  }

  {
    const std::string data = read_file(dir / "points3D.txt");
    std::size_t line_no = 0;
    for (std::string_view line : split_lines(data)) {
      ++line_no;
      if (is_skippable(line)) continue;
      LineTokens tok(line, "points3D.txt:" + std::to_string(line_no));
      ColmapPoint3D p;
      p.point3D_id = tok.number<uint64_t>();
      for (double& x : p.xyz) x = tok.number<double>();
      for (uint8_t& c : p.rgb) {
        const auto v = tok.number<unsigned>();
        if (v > 255) {
          throw InputError("points3D.txt:" + std::to_string(line_no) + ": color out of range");
        }
        c = static_cast<uint8_t>(v);
      }
      p.error = tok.number<double>();
      while (!tok.at_end()) {
        TrackElement t;
        t.image_id = tok.number<uint32_t>();
        t.point2D_idx = tok.number<uint32_t>();
        p.track.push_back(t);
      }
      model.points3D.push_back(std::move(p));
    }
  }

  model.validate();
  return model;
}

// ---------------------------------------------------------------------------
//  Conversions
// ---------------------------------------------------------------------------

ColmapCamera to_colmap_camera(const CameraIntrinsics& k, uint32_t camera_id) {
  k.validate();
  ColmapCamera c;
  c.camera_id = camera_id;
  c.model_id = static_cast<int32_t>(k.model);
  c.width = k.width;
  c.height = k.height;
  if (k.model == CameraModelType::kSimplePinhole) {
    c.params = {k.fx, k.cx, k.cy};
  } else {
    c.params = {k.fx, k.fy, k.cx, k.cy};
  }
  return c;
}

CameraIntrinsics to_intrinsics(const ColmapCamera& c) {
  const int n = colmap_param_count(c.model_id);
  if (n < 0 || c.params.size() != static_cast<std::size_t>(n)) {
    throw InputError("camera " + std::to_string(c.camera_id) + ": unsupported model or params");
  }
  CameraIntrinsics k;
  k.model = static_cast<CameraModelType>(c.model_id);
  k.width = c.width;
  k.height = c.height;
  if (k.model == CameraModelType::kSimplePinhole) {
    k.fx = k.fy = c.params[0];
    k.cx = c.params[1];
    k.cy = c.params[2];
  } else {
    k.fx = c.params[0];
    k.fy = c.params[1];
    k.cx = c.params[2];
    k.cy = c.params[3];
  }
  k.validate();
  return k;
}

Pose image_pose(const ColmapImage& image) {
  Eigen::Vector4d q(image.qvec[0], image.qvec[1], image.qvec[2], image.qvec[3]);
  const double norm = q.norm();
  if (!(norm > 0.0) || !std::isfinite(norm)) {
    throw InputError("image " + std::to_string(image.image_id) + ": degenerate quaternion");
  }
  Pose pose;
  pose.qvec = canonicalize_quaternion(q / norm);
  pose.tvec = Eigen::Vector3d(image.tvec[0], image.tvec[1], image.tvec[2]);
  if (!pose.tvec.allFinite()) {
    throw InputError("image " + std::to_string(image.image_id) + ": non-finite translation");
  }
  return pose;
}

ColmapModel rig_to_colmap(const CameraRig& rig) {
  rig.validate();
  ColmapModel model;
  for (std::size_t i = 0; i < rig.cameras.size(); ++i) {
    model.cameras.push_back(to_colmap_camera(rig.cameras[i], static_cast<uint32_t>(i + 1)));
  }
  for (std::size_t i = 0; i < rig.frames.size(); ++i) {
    const RigFrame& f = rig.frames[i];
    ColmapImage im;
    im.image_id = static_cast<uint32_t>(i + 1);
    im.camera_id = static_cast<uint32_t>(f.camera_index + 1);
    im.name = f.name;
    for (int j = 0; j < 4; ++j) im.qvec[static_cast<std::size_t>(j)] = f.pose.qvec[j];
    for (int j = 0; j < 3; ++j) im.tvec[static_cast<std::size_t>(j)] = f.pose.tvec[j];
    model.images.push_back(std::move(im));
  }
  return model;
}

}  // namespace splatprep
