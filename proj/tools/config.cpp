#include "config.hpp"

#include <cmath>
#include <initializer_list>

#include "splatprep/error.hpp"
#include "splatprep/file_util.hpp"

namespace splatprep::cli {

namespace {

using json = nlohmann::json;

void check_keys(const json& obj, std::initializer_list<std::string_view> allowed,
                const std::string& section) {
  if (!obj.is_object()) {
    throw InputError((section.empty() ? std::string("config") : section) + ": must be an object");
  }
  for (const auto& [key, value] : obj.items()) {
    bool known = false;
    for (std::string_view a : allowed) known = known || key == a;
    if (!known) {
      throw InputError((section.empty() ? key : section + "." + key) + ": unknown key");
    }
  }
}

double get_double(const json& v, const std::string& field) {
  if (!v.is_number()) throw InputError(field + ": must be a number");
  return v.get<double>();
}

uint64_t get_unsigned(const json& v, const std::string& field) {
  if (!v.is_number_unsigned()) throw InputError(field + ": must be a non-negative integer");
  return v.get<uint64_t>();
}

bool get_bool(const json& v, const std::string& field) {
  if (!v.is_boolean()) throw InputError(field + ": must be true or false");
  return v.get<bool>();
}

std::string get_string(const json& v, const std::string& field) {
  if (!v.is_string()) throw InputError(field + ": must be a string");
  return v.get<std::string>();
}

// Re-labels errors from module-level parsers with the config field name.
template <typename F>
auto with_field(const std::string& field, F&& f) {
  try {
    return f();
  } catch (const InputError& e) {
    throw InputError(field + ": " + e.what());
  }
}

}  // namespace

ModelFormat parse_model_format(std::string_view name) {
  if (name == "binary") return ModelFormat::kBinary;
  if (name == "text") return ModelFormat::kText;
  if (name == "both") return ModelFormat::kBoth;
  throw InputError("unknown model format '" + std::string(name) + "' (binary, text or both)");
}

std::string_view model_format_name(ModelFormat format) {
  switch (format) {
    case ModelFormat::kBinary:
      return "binary";
    case ModelFormat::kText:
      return "text";
    case ModelFormat::kBoth:
      return "both";
  }
  return "binary";
}

PipelineConfig parse_config(std::string_view document) {
  PipelineConfig cfg;
  json doc;
  try {
    doc = json::parse(document);
  } catch (const json::parse_error& e) {
    throw InputError(std::string("config: parse error: ") + e.what());
  }
  if (doc.is_null()) return cfg;
  check_keys(doc, {"cameras", "fusion", "random_init", "enhance", "output", "threads"}, "");

  if (auto it = doc.find("cameras"); it != doc.end()) {
    check_keys(*it, {"convention"}, "cameras");
    if (auto c = it->find("convention"); c != it->end()) {
      const std::string tag = get_string(*c, "cameras.convention");
      cfg.convention = with_field("cameras.convention", [&] { return parse_pose_convention(tag); });
    }
  }

  if (auto it = doc.find("fusion"); it != doc.end()) {
    const json& f = *it;
    check_keys(f, {"voxel_size", "voxel_size_relative", "min_obs", "stride", "depth_scale",
                   "with_tracks"},
               "fusion");
    if (auto v = f.find("voxel_size"); v != f.end() && !v->is_null()) {
      cfg.fusion.voxel_size = get_double(*v, "fusion.voxel_size");
    }
    if (auto v = f.find("voxel_size_relative"); v != f.end()) {
      cfg.fusion.voxel_size_relative = get_double(*v, "fusion.voxel_size_relative");
    }
    if (auto v = f.find("min_obs"); v != f.end()) {
      const uint64_t n = get_unsigned(*v, "fusion.min_obs");
      if (n > UINT32_MAX) throw InputError("fusion.min_obs: too large");
      cfg.fusion.min_obs = static_cast<uint32_t>(n);
    }
    if (auto v = f.find("stride"); v != f.end()) {
      const uint64_t n = get_unsigned(*v, "fusion.stride");
      if (n > 4096) throw InputError("fusion.stride: too large");
      cfg.fusion.stride = static_cast<int>(n);
    }
    if (auto v = f.find("depth_scale"); v != f.end() && !v->is_null()) {
      cfg.fusion.depth_scale = get_double(*v, "fusion.depth_scale");
    }
    if (auto v = f.find("with_tracks"); v != f.end()) {
      cfg.fusion.with_tracks = get_bool(*v, "fusion.with_tracks");
    }
  }

  if (auto it = doc.find("random_init"); it != doc.end()) {
    const json& r = *it;
    check_keys(r, {"count", "seed", "padding"}, "random_init");
    if (auto v = r.find("count"); v != r.end()) {
      cfg.random_init.count = static_cast<std::size_t>(get_unsigned(*v, "random_init.count"));
    }
    if (auto v = r.find("seed"); v != r.end()) {
      cfg.random_init.seed = get_unsigned(*v, "random_init.seed");
    }
    if (auto v = r.find("padding"); v != r.end()) {
      cfg.random_init.padding = get_double(*v, "random_init.padding");
    }
  }

  if (auto it = doc.find("enhance"); it != doc.end()) {
    const json& e = *it;
    check_keys(e, {"beta", "alpha", "sat", "gamma", "order"}, "enhance");
    if (auto v = e.find("beta"); v != e.end()) cfg.enhance.beta = get_double(*v, "enhance.beta");
    if (auto v = e.find("alpha"); v != e.end()) {
      cfg.enhance.alpha = get_double(*v, "enhance.alpha");
    }
    if (auto v = e.find("sat"); v != e.end()) cfg.enhance.sat = get_double(*v, "enhance.sat");
    if (auto v = e.find("gamma"); v != e.end()) {
      cfg.enhance.gamma = get_double(*v, "enhance.gamma");
    }
    if (auto v = e.find("order"); v != e.end()) {
      const std::string csv = get_string(*v, "enhance.order");
      try {
        cfg.enhance.order = parse_stage_order(csv);
      } catch (const InputError& e) {
        throw InputError(std::string("enhance.") + e.what());
      }
    }
  }

  if (auto it = doc.find("output"); it != doc.end()) {
    check_keys(*it, {"dir", "format"}, "output");
    if (auto v = it->find("dir"); v != it->end() && !v->is_null()) {
      cfg.output.dir = std::filesystem::path(get_string(*v, "output.dir"));
    }
    if (auto v = it->find("format"); v != it->end()) {
      const std::string name = get_string(*v, "output.format");
      cfg.output.format = with_field("output.format", [&] { return parse_model_format(name); });
    }
  }

  if (auto v = doc.find("threads"); v != doc.end()) {
    const uint64_t n = get_unsigned(*v, "threads");
    if (n > 1024) throw InputError("threads: too large");
    cfg.threads = static_cast<unsigned>(n);
  }

  validate_config(cfg);
  return cfg;
}

PipelineConfig load_config(const std::optional<std::filesystem::path>& path) {
  if (!path) return PipelineConfig{};
  const std::string text = read_file(*path);
  // An empty file means "all defaults".
  if (text.find_first_not_of(" \t\r\n") == std::string::npos) return PipelineConfig{};
  try {
    return parse_config(text);
  } catch (const InputError& e) {
    throw InputError(path->string() + ": " + e.what());
  }
}

void validate_config(const PipelineConfig& c) {
  if (c.fusion.voxel_size &&
      (!(*c.fusion.voxel_size > 0.0) || !std::isfinite(*c.fusion.voxel_size))) {
    throw InputError("fusion.voxel_size: must be > 0");
  }
  if (!(c.fusion.voxel_size_relative > 0.0) || !std::isfinite(c.fusion.voxel_size_relative)) {
    throw InputError("fusion.voxel_size_relative: must be > 0");
  }
  if (c.fusion.min_obs < 1) throw InputError("fusion.min_obs: must be >= 1");
  if (c.fusion.stride < 1) throw InputError("fusion.stride: must be >= 1");
  if (c.fusion.depth_scale &&
      (!(*c.fusion.depth_scale > 0.0) || !std::isfinite(*c.fusion.depth_scale))) {
    throw InputError("fusion.depth_scale: must be > 0");
  }
  if (c.random_init.count < 1) throw InputError("random_init.count: must be >= 1");
  if (!(c.random_init.padding >= 0.0) || !std::isfinite(c.random_init.padding)) {
    throw InputError("random_init.padding: must be >= 0");
  }
  try {
    c.enhance.validate();
  } catch (const InputError& e) {
    // EnhanceParams reports "gamma: ...", which becomes "enhance.gamma: ...".
    throw InputError(std::string("enhance.") + e.what());
  }
  if (c.threads < 1) throw InputError("threads: must be >= 1");
}

nlohmann::json config_to_json(const PipelineConfig& c) {
  json fusion = {{"voxel_size", c.fusion.voxel_size ? json(*c.fusion.voxel_size) : json(nullptr)},
                 {"voxel_size_relative", c.fusion.voxel_size_relative},
                 {"min_obs", c.fusion.min_obs},
                 {"stride", c.fusion.stride},
                 {"depth_scale",
                  c.fusion.depth_scale ? json(*c.fusion.depth_scale) : json(nullptr)},
                 {"with_tracks", c.fusion.with_tracks}};
  return {{"cameras", {{"convention", pose_convention_name(c.convention)}}},
          {"fusion", fusion},
          {"random_init",
           {{"count", c.random_init.count},
            {"seed", c.random_init.seed},
            {"padding", c.random_init.padding}}},
          {"enhance",
           {{"beta", c.enhance.beta},
            {"alpha", c.enhance.alpha},
            {"sat", c.enhance.sat},
            {"gamma", c.enhance.gamma},
            {"order", format_stage_order(c.enhance.order)}}},
          {"output",
           {{"dir", c.output.dir ? json(c.output.dir->string()) : json(nullptr)},
            {"format", model_format_name(c.output.format)}}},
          {"threads", c.threads}};
}

}  // namespace splatprep::cli
