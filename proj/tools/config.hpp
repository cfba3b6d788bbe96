#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "splatprep/camera_model.hpp"
#include "splatprep/enhance.hpp"
#include "splatprep/geometry.hpp"

namespace splatprep::cli {

enum class ModelFormat { kBinary, kText, kBoth };

ModelFormat parse_model_format(std::string_view name);
std::string_view model_format_name(ModelFormat format);

struct FusionConfig {
  /// Absolute voxel edge in scene units; when unset the edge is
  /// voxel_size_relative times the diagonal of the raw points' bounding box.
  std::optional<double> voxel_size;
  double voxel_size_relative = 0.01;
  uint32_t min_obs = 2;
  int stride = 2;
  /// Scene units per 16-bit PNG depth step; required only for PNG depth.
  std::optional<double> depth_scale;
  bool with_tracks = false;
};

struct RandomInitConfig {
  std::size_t count = kDefaultRandomInitCount;
  uint64_t seed = 0;
  double padding = 0.0;
};

struct OutputConfig {
  std::optional<std::filesystem::path> dir;
  ModelFormat format = ModelFormat::kBinary;
};

/// Effective settings for every subcommand. Built from defaults, then a JSON
/// config file, then command-line flags, in increasing precedence.
struct PipelineConfig {
  PoseConvention convention = PoseConvention::kOpenGlCameraToWorld;
  FusionConfig fusion;
  RandomInitConfig random_init;
  EnhanceParams enhance;
  OutputConfig output;
  unsigned threads = 1;
};

/// Parses a config document. Every key is optional; unknown keys, wrong
/// types and out-of-range values raise InputError naming the field (e.g.
/// "enhance.gamma: must be > 0").
PipelineConfig parse_config(std::string_view document);

/// Built-in defaults when `path` is empty, otherwise parse_config of the file.
PipelineConfig load_config(const std::optional<std::filesystem::path>& path);

/// Throws InputError naming the first field outside its valid range.
void validate_config(const PipelineConfig& config);

nlohmann::json config_to_json(const PipelineConfig& config);

}  // namespace splatprep::cli
