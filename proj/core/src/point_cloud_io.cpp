#include "splatprep/point_cloud_io.hpp"

#include <charconv>
#include <sstream>

#include "splatprep/error.hpp"
#include "splatprep/file_util.hpp"

namespace splatprep {

namespace fs = std::filesystem;

namespace {

void append_double(std::string& out, double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  out.append(buf, res.ptr);
}

}  // namespace

std::string encode_ply_ascii(const PointCloud& cloud) {
  cloud.validate();
  std::string out;
  out += "ply\nformat ascii 1.0\nelement vertex ";
  out += std::to_string(cloud.size());
  out += "\nproperty double x\nproperty double y\nproperty double z\n";
  out += "property uchar red\nproperty uchar green\nproperty uchar blue\nend_header\n";
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const auto& p = cloud.positions[i];
    const auto& c = cloud.colors[i];
    append_double(out, p.x());
    out += ' ';
    append_double(out, p.y());
    out += ' ';
    append_double(out, p.z());
    out += ' ';
    out += std::to_string(c[0]);
    out += ' ';
    out += std::to_string(c[1]);
    out += ' ';
    out += std::to_string(c[2]);
    out += '\n';
  }
  return out;
}

void write_ply_ascii(const PointCloud& cloud, const fs::path& path) {
  write_file_atomic(path, encode_ply_ascii(cloud));
}

PointCloud read_ply_ascii(const fs::path& path) {
  const std::string data = read_file(path);
  std::istringstream in(data);
  std::string line;
  const std::string where = path.string();

  if (!std::getline(in, line) || line.rfind("ply", 0) != 0) {
    throw InputError(where + ": not a PLY file");
  }
  std::size_t vertex_count = 0;
  bool in_vertex = false;
  bool ascii = false;
  std::vector<std::string> props;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::istringstream ls(line);
    std::string word;
    ls >> word;
    if (word == "format") {
      std::string fmt;
      ls >> fmt;
      ascii = fmt == "ascii";
    } else if (word == "element") {
      std::string name;
      ls >> name;
      in_vertex = name == "vertex";
      if (in_vertex) ls >> vertex_count;
    } else if (word == "property" && in_vertex) {
      std::string type, name;
      ls >> type;
      if (type == "list") {
        throw InputError(where + ": list properties on vertices are not supported");
      }
      ls >> name;
      props.push_back(name);
    } else if (word == "end_header") {
      break;
    }
  }
  if (!ascii) {
    throw InputError(where + ": only ASCII PLY is supported");
  }
  auto index_of = [&](const char* name) -> int {
    for (std::size_t i = 0; i < props.size(); ++i) {
      if (props[i] == name) return static_cast<int>(i);
    }
    return -1;
  };
  const int ix = index_of("x"), iy = index_of("y"), iz = index_of("z");
  const int ir = index_of("red"), ig = index_of("green"), ib = index_of("blue");
  if (ix < 0 || iy < 0 || iz < 0) {
    throw InputError(where + ": vertex element lacks x/y/z");
  }

  PointCloud cloud;
  std::vector<double> values(props.size());
  for (std::size_t n = 0; n < vertex_count; ++n) {
    if (!std::getline(in, line)) {
      throw InputError(where + ": truncated vertex list");
    }
    const char* p = line.data();
    const char* end = line.data() + line.size();
    for (double& v : values) {
      while (p < end && (*p == ' ' || *p == '\t')) ++p;
      const auto res = std::from_chars(p, end, v);
      if (res.ec != std::errc()) {
        throw InputError(where + ": bad vertex value on vertex " + std::to_string(n));
      }
      p = res.ptr;
    }
    cloud.positions.emplace_back(values[static_cast<std::size_t>(ix)],
                                 values[static_cast<std::size_t>(iy)],
                                 values[static_cast<std::size_t>(iz)]);
    Rgb8 c = kMidGray;
    if (ir >= 0 && ig >= 0 && ib >= 0) {
      c = {static_cast<uint8_t>(values[static_cast<std::size_t>(ir)]),
           static_cast<uint8_t>(values[static_cast<std::size_t>(ig)]),
           static_cast<uint8_t>(values[static_cast<std::size_t>(ib)])};
    }
    cloud.colors.push_back(c);
  }
  cloud.observations.assign(cloud.size(), 1u);
  cloud.validate();
  return cloud;
}

}  // namespace splatprep
