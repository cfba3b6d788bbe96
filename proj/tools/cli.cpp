#include "cli.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <thread>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>
#include <spdlog/sinks/stdout_sinks.h>
#include <spdlog/spdlog.h>

#include "config.hpp"
#include "splatprep/colmap_model.hpp"
#include "splatprep/depth_io.hpp"
#include "splatprep/error.hpp"
#include "splatprep/file_util.hpp"
#include "splatprep/imaging.hpp"
#include "splatprep/point_cloud_io.hpp"
#include "splatprep/quality.hpp"

namespace splatprep::cli {

namespace fs = std::filesystem;

namespace {

// Runs fn(i) for i in [0, n) on up to `threads` workers. The first exception
// (by worker) is rethrown after all workers finish.
void parallel_for(std::size_t n, unsigned threads, const std::function<void(std::size_t)>& fn) {
  const std::size_t workers = std::clamp<std::size_t>(threads, 1, std::max<std::size_t>(n, 1));
  if (workers == 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(workers);
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (std::size_t i = next++; i < n; i = next++) fn(i);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

ColmapModel read_model(const fs::path& dir) {
  std::error_code ec;
  if (fs::is_regular_file(dir / "cameras.bin", ec)) return read_binary(dir);
  if (fs::is_regular_file(dir / "cameras.txt", ec)) return read_text(dir);
  throw InputError("no COLMAP model (cameras.bin or cameras.txt) in " + dir.string());
}

void write_model(const ColmapModel& model, const fs::path& dir, ModelFormat format) {
  if (format != ModelFormat::kText) write_binary(model, dir);
  if (format != ModelFormat::kBinary) write_text(model, dir);
}

fs::path require_out(const std::optional<fs::path>& flag, const PipelineConfig& cfg) {
  if (flag) return *flag;
  if (cfg.output.dir) return *cfg.output.dir;
  throw InputError("--out is required (or set output.dir in the config file)");
}

Aabb bounds_of(const std::vector<PointCloud>& clouds) {
  Aabb box;
  box.min.setConstant(std::numeric_limits<double>::infinity());
  box.max.setConstant(-std::numeric_limits<double>::infinity());
  for (const auto& c : clouds) {
    for (const auto& p : c.positions) {
      box.min = box.min.cwiseMin(p);
      box.max = box.max.cwiseMax(p);
    }
  }
  return box;
}

DepthMap load_depth_for(const fs::path& depth_dir, const std::string& image_name,
                        const std::optional<double>& scale) {
  const std::string stem = fs::path(image_name).stem().string();
  std::error_code ec;
  const fs::path pfm = depth_dir / (stem + ".pfm");
  if (fs::is_regular_file(pfm, ec)) return read_pfm(pfm);
  const fs::path png = depth_dir / (stem + ".png");
  if (fs::is_regular_file(png, ec)) {
    if (!scale) {
      throw InputError(png.string() + ": 16-bit PNG depth needs --depth-scale");
    }
    return read_depth_png16(png, *scale);
  }
  throw InputError("no depth map " + stem + ".pfm or " + stem + ".png in " + depth_dir.string());
}

fs::path find_color_image(const fs::path& images_dir, const std::string& image_name) {
  std::error_code ec;
  const fs::path direct = images_dir / image_name;
  if (fs::is_regular_file(direct, ec)) return direct;
  const fs::path flat = images_dir / fs::path(image_name).filename();
  if (fs::is_regular_file(flat, ec)) return flat;
  throw InputError("no color image for '" + image_name + "' in " + images_dir.string());
}

std::pair<std::string, fs::path> parse_branch(const std::string& spec) {
  const auto eq = spec.find('=');
  if (eq == std::string::npos || eq == 0 || eq + 1 == spec.size()) {
    throw InputError("--branch expects LABEL=DIR, got '" + spec + "'");
  }
  return {spec.substr(0, eq), fs::path(spec.substr(eq + 1))};
}

void write_json(const nlohmann::json& j, const fs::path& path) {
  write_file_atomic(path, j.dump(2) + "\n");
}

// Values given on the command line; unset options leave the config alone.
struct Flags {
  std::optional<fs::path> config;

  std::string convention;
  std::string format;
  fs::path cameras;
  std::optional<fs::path> out;

  fs::path model;
  fs::path depth;
  fs::path images;
  double depth_scale = 0.0;
  double voxel_size = 0.0;
  double voxel_size_rel = 0.0;
  uint32_t min_obs = 0;
  int stride = 0;
  unsigned threads = 0;
  bool with_tracks = false;
  fs::path ply;

  fs::path ply_in;
  std::vector<double> bbox;
  double padding = 0.0;
  std::size_t count = 0;
  uint64_t seed = 0;

  fs::path in;
  fs::path ref;
  double beta = 0.0;
  double alpha = 0.0;
  double sat = 0.0;
  double gamma = 0.0;
  std::string order;

  fs::path pred;
  fs::path gt;
  std::vector<std::string> branches;
  std::string criterion = "psnr";
  std::string choose;
};

bool given(const CLI::App* app, const std::string& name) {
  // Options are looked up on the subcommand that owns them.
  const CLI::Option* opt = app->get_option_no_throw(name);
  return opt != nullptr && opt->count() > 0;
}

PipelineConfig effective_config(const Flags& f, const CLI::App* sub) {
  PipelineConfig cfg = load_config(f.config);
  if (given(sub, "--convention")) cfg.convention = parse_pose_convention(f.convention);
  if (given(sub, "--format")) cfg.output.format = parse_model_format(f.format);
  if (given(sub, "--out") && f.out) cfg.output.dir = *f.out;
  if (given(sub, "--depth-scale")) cfg.fusion.depth_scale = f.depth_scale;
  if (given(sub, "--voxel-size")) cfg.fusion.voxel_size = f.voxel_size;
  if (given(sub, "--voxel-size-rel")) {
    cfg.fusion.voxel_size_relative = f.voxel_size_rel;
    if (!given(sub, "--voxel-size")) cfg.fusion.voxel_size.reset();
  }
  if (given(sub, "--min-obs")) cfg.fusion.min_obs = f.min_obs;
  if (given(sub, "--stride")) cfg.fusion.stride = f.stride;
  if (given(sub, "--with-tracks")) cfg.fusion.with_tracks = f.with_tracks;
  if (given(sub, "--padding")) cfg.random_init.padding = f.padding;
  if (given(sub, "--count")) cfg.random_init.count = f.count;
  if (given(sub, "--seed")) cfg.random_init.seed = f.seed;
  if (given(sub, "--beta")) cfg.enhance.beta = f.beta;
  if (given(sub, "--alpha")) cfg.enhance.alpha = f.alpha;
  if (given(sub, "--sat")) cfg.enhance.sat = f.sat;
  if (given(sub, "--gamma")) cfg.enhance.gamma = f.gamma;
  if (given(sub, "--order")) cfg.enhance.order = parse_stage_order(f.order);
  if (given(sub, "--threads")) cfg.threads = f.threads;
  validate_config(cfg);
  spdlog::debug("effective config: {}", config_to_json(cfg).dump());
  return cfg;
}

int cmd_convert_cameras(const Flags& f, const PipelineConfig& cfg, std::ostream& out) {
  const fs::path dir = require_out(f.out, cfg);
  const CameraRig rig = parse_camera_json(read_file(f.cameras), cfg.convention);
  const ColmapModel model = rig_to_colmap(rig);
  write_model(model, dir, cfg.output.format);
  out << "wrote " << model.cameras.size() << " camera(s), " << model.images.size()
      << " image(s) to " << dir.string() << "\n";
  return kExitOk;
}

int cmd_fuse_depth(const Flags& f, const CLI::App* sub, const PipelineConfig& cfg,
                   std::ostream& out) {
  const fs::path dir = require_out(f.out, cfg);
  ColmapModel model = read_model(f.model);
  model.validate();
  if (model.images.empty()) throw InputError(f.model.string() + ": model has no images");
  std::map<uint32_t, const ColmapCamera*> cameras;
  for (const auto& c : model.cameras) cameras[c.camera_id] = &c;

  const bool with_colors = given(sub, "--images");
  std::vector<PointCloud> clouds(model.images.size());
  parallel_for(model.images.size(), cfg.threads, [&](std::size_t i) {
    const ColmapImage& image = model.images[i];
    const CameraIntrinsics k = to_intrinsics(*cameras.at(image.camera_id));
    const DepthMap depth = load_depth_for(f.depth, image.name, cfg.fusion.depth_scale);
    std::optional<ImageBuffer> color;
    if (with_colors) color = load_image(find_color_image(f.images, image.name));
    BackProjectOptions opts;
    opts.stride = cfg.fusion.stride;
    if (cfg.fusion.with_tracks) opts.track_image_id = image.image_id;
    try {
      clouds[i] = back_project(depth, k, image_pose(image), color ? &*color : nullptr, opts);
    } catch (const InputError& e) {
      throw InputError(image.name + ": " + e.what());
    }
  });

  std::size_t raw = 0;
  for (const auto& c : clouds) raw += c.size();
  if (raw == 0) throw InputError("no valid depth samples in any view");

  double voxel = 0.0;
  if (cfg.fusion.voxel_size) {
    voxel = *cfg.fusion.voxel_size;
  } else {
    voxel = cfg.fusion.voxel_size_relative * bounds_of(clouds).diagonal();
    if (!(voxel > 0.0)) {
      throw InputError("all depth samples coincide; pass --voxel-size explicitly");
    }
  }
  spdlog::info("fusing {} points from {} views, voxel {}", raw, clouds.size(), voxel);
  const PointCloud fused = voxel_fuse(clouds, voxel, cfg.fusion.min_obs, cfg.threads);

  for (auto& image : model.images) image.points2D.clear();
  model.points3D.clear();
  if (cfg.fusion.with_tracks) {
    append_cloud_with_tracks(model, fused, 1);
  } else {
    model.points3D = cloud_to_colmap(fused, 1);
  }
  write_model(model, dir, cfg.output.format);
  if (given(sub, "--ply")) write_ply_ascii(fused, f.ply);
  out << "fused " << raw << " samples into " << fused.size() << " point(s) (voxel " << voxel
      << ")\n";
  return kExitOk;
}

int cmd_init_random(const Flags& f, const CLI::App* sub, const PipelineConfig& cfg,
                    std::ostream& out) {
  const fs::path dir = require_out(f.out, cfg);
  const int sources = int{given(sub, "--model")} + int{given(sub, "--ply-in")} +
                      int{given(sub, "--bbox")};
  if (sources != 1) {
    throw InputError("init-random needs exactly one of --model, --ply-in, --bbox");
  }
  ColmapModel model;
  PointCloud reference;
  if (given(sub, "--model")) {
    model = read_model(f.model);
    model.validate();
    if (!model.points3D.empty()) {
      for (const auto& p : model.points3D) reference.positions.emplace_back(p.xyz[0], p.xyz[1], p.xyz[2]);
    } else {
      for (const auto& image : model.images) {
        reference.positions.push_back(image_pose(image).center());
      }
    }
    if (reference.positions.empty()) {
      throw InputError(f.model.string() + ": model has neither points nor images to bound");
    }
  } else if (given(sub, "--ply-in")) {
    reference = read_ply_ascii(f.ply_in);
  }

  Aabb box;
  if (given(sub, "--bbox")) {
    if (f.bbox.size() != 6) throw InputError("--bbox expects six numbers x0,y0,z0,x1,y1,z1");
    box.min = Eigen::Vector3d(f.bbox[0], f.bbox[1], f.bbox[2]);
    box.max = Eigen::Vector3d(f.bbox[3], f.bbox[4], f.bbox[5]);
    const Eigen::Vector3d pad = box.extent() * cfg.random_init.padding;
    box.min -= pad;
    box.max += pad;
    box.validate();
  } else {
    reference.colors.assign(reference.positions.size(), kMidGray);
    reference.observations.assign(reference.positions.size(), 1);
    box = compute_aabb(reference, cfg.random_init.padding);
  }

  const PointCloud cloud = random_init(box, cfg.random_init.count, cfg.random_init.seed);
  for (auto& image : model.images) image.points2D.clear();
  model.points3D = cloud_to_colmap(cloud, 1);
  write_model(model, dir, cfg.output.format);
  if (given(sub, "--ply")) write_ply_ascii(cloud, f.ply);
  out << "sampled " << cloud.size() << " point(s) with seed " << cfg.random_init.seed << "\n";
  return kExitOk;
}

// Pairs each input with its output path and optional reference path.
struct ImageJob {
  fs::path in;
  fs::path out;
  std::optional<fs::path> ref;
};

std::vector<ImageJob> plan_image_jobs(const fs::path& in, const fs::path& out,
                                      const std::optional<fs::path>& ref) {
  std::error_code ec;
  const bool ref_is_dir = ref && fs::is_directory(*ref, ec);
  if (ref && !ref_is_dir && !fs::is_regular_file(*ref, ec)) {
    throw InputError("reference " + ref->string() + " does not exist");
  }
  std::vector<ImageJob> jobs;
  if (fs::is_regular_file(in, ec)) {
    jobs.push_back({in, out, ref});
  } else if (fs::is_directory(in, ec)) {
    for (const auto& p : list_png_files(in)) jobs.push_back({p, out / p.filename(), ref});
    if (jobs.empty()) throw InputError("no PNG images in " + in.string());
    ensure_directory(out);
  } else {
    throw InputError("input " + in.string() + " does not exist");
  }
  if (ref_is_dir) {
    for (auto& job : jobs) {
      job.ref = *ref / job.in.filename();
      if (!fs::is_regular_file(*job.ref, ec)) {
        throw InputError("no reference " + job.in.filename().string() + " in " + ref->string());
      }
    }
  }
  return jobs;
}

void run_image_jobs(const std::vector<ImageJob>& jobs, unsigned threads,
                    const std::function<ImageBuffer(const ImageBuffer&, const ImageBuffer*)>& op) {
  // A single shared reference is decoded once.
  std::optional<ImageBuffer> shared_ref;
  const bool shared = !jobs.empty() && jobs.front().ref &&
                      std::all_of(jobs.begin(), jobs.end(),
                                  [&](const ImageJob& j) { return j.ref == jobs.front().ref; });
  if (shared) shared_ref = load_image(*jobs.front().ref);
  parallel_for(jobs.size(), threads, [&](std::size_t i) {
    const ImageJob& job = jobs[i];
    const ImageBuffer src = load_image(job.in);
    std::optional<ImageBuffer> own_ref;
    const ImageBuffer* ref = nullptr;
    if (shared) {
      ref = &*shared_ref;
    } else if (job.ref) {
      own_ref = load_image(*job.ref);
      ref = &*own_ref;
    }
    save_image(op(src, ref), job.out);
  });
}

int cmd_enhance(const Flags& f, const CLI::App* sub, const PipelineConfig& cfg,
                std::ostream& out) {
  const fs::path dir = require_out(f.out, cfg);
  std::optional<fs::path> ref;
  if (given(sub, "--ref")) ref = f.ref;
  const auto jobs = plan_image_jobs(f.in, dir, ref);
  EnhanceParams params = cfg.enhance;
  params.reference = ref;
  run_image_jobs(jobs, cfg.threads, [&](const ImageBuffer& src, const ImageBuffer* r) {
    return enhance_pipeline(src, params, r);
  });
  out << "enhanced " << jobs.size() << " image(s) with order "
      << format_stage_order(params.order) << "\n";
  return kExitOk;
}

int cmd_match_hist(const Flags& f, const PipelineConfig& cfg, std::ostream& out) {
  const fs::path dst = require_out(f.out, cfg);
  const auto jobs = plan_image_jobs(f.in, dst, f.ref);
  run_image_jobs(jobs, cfg.threads, [](const ImageBuffer& src, const ImageBuffer* r) {
    return histogram_match(src, *r);
  });
  out << "matched " << jobs.size() << " image(s)\n";
  return kExitOk;
}

int cmd_metrics(const Flags& f, const PipelineConfig& cfg, std::ostream& out) {
  const fs::path dst = require_out(f.out, cfg);
  const MetricReport report = evaluate_dir(f.pred, f.gt, cfg.threads);
  write_json(report_to_json(report), dst);
  out << "images " << report.count() << "  mean PSNR " << report.mean_psnr << "  mean SSIM "
      << report.mean_ssim << "  infinite PSNR " << report.infinite_psnr_count << "\n";
  return kExitOk;
}

int cmd_select(const Flags& f, const CLI::App* sub, const PipelineConfig& cfg,
               std::ostream& out) {
  const fs::path dst = require_out(f.out, cfg);
  const SelectionCriterion criterion = parse_selection_criterion(f.criterion);
  std::map<std::string, fs::path> branches;
  for (const auto& spec : f.branches) {
    auto [label, dir] = parse_branch(spec);
    if (!branches.emplace(label, dir).second) {
      throw InputError("duplicate branch label '" + label + "'");
    }
  }
  std::map<std::string, MetricReport> reports;
  for (const auto& [label, dir] : branches) {
    try {
      reports.emplace(label, evaluate_dir(dir, f.gt, cfg.threads));
    } catch (const InputError& e) {
      throw InputError("branch " + label + ": " + e.what());
    }
  }
  SelectionResult result = select_branch(reports, criterion);
  if (given(sub, "--choose")) {
    if (!reports.count(f.choose)) {
      throw InputError("--choose names unknown branch '" + f.choose + "'");
    }
    result.chosen = f.choose;
    result.overridden = true;
  }
  write_json(selection_to_json(result), dst);
  out << result.chosen << "\n";
  return kExitOk;
}

std::string usage_text(const CLI::App& app) {
  return app.help() + "\nLog verbosity: SPLATPREP_LOG=trace|debug|info|warn|error|off\n";
}

}  // namespace

void configure_logging() {
  static const bool once = [] {
    auto logger = spdlog::stderr_logger_mt("splatprep");
    logger->set_pattern("[%l] %v");
    spdlog::set_default_logger(logger);
    return true;
  }();
  (void)once;
  spdlog::level::level_enum level = spdlog::level::warn;
  if (const char* env = std::getenv("SPLATPREP_LOG"); env != nullptr && *env != '\0') {
    level = spdlog::level::from_str(env);
    // from_str maps unknown names to off; keep the default instead.
    if (level == spdlog::level::off && std::string_view(env) != "off") {
      level = spdlog::level::warn;
    }
  }
  spdlog::set_level(level);
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  configure_logging();

  CLI::App app{"Depth fusion, camera conversion, photometric enhancement and image metrics "
               "for splatting pipelines",
               "splatprep"};
  app.require_subcommand(1);
  Flags f;
  app.add_option("--config", f.config, "JSON config file (flags override it)");

  auto add_threads = [&](CLI::App* s) {
    s->add_option("--threads", f.threads, "worker threads")->check(CLI::Range(1u, 1024u));
  };
  auto add_format = [&](CLI::App* s) {
    s->add_option("--format", f.format, "model format: binary, text or both");
  };

  CLI::App* convert = app.add_subcommand("convert-cameras", "camera JSON to a COLMAP model");
  convert->add_option("--cameras", f.cameras, "transforms-style camera JSON")->required();
  convert->add_option("--convention", f.convention, "opengl_c2w, opencv_c2w or opencv_w2c");
  convert->add_option("--out", f.out, "output model directory");
  add_format(convert);

  CLI::App* fuse = app.add_subcommand("fuse-depth", "back-project and voxel-fuse depth maps");
  fuse->add_option("--model", f.model, "input COLMAP model directory")->required();
  fuse->add_option("--depth", f.depth, "directory of <stem>.pfm or <stem>.png depth maps")
      ->required();
  fuse->add_option("--images", f.images, "directory of color images for point colors");
  fuse->add_option("--depth-scale", f.depth_scale, "scene units per 16-bit PNG depth step");
  fuse->add_option("--voxel-size", f.voxel_size, "absolute voxel edge");
  fuse->add_option("--voxel-size-rel", f.voxel_size_rel,
                   "voxel edge as a fraction of the raw points' bounding-box diagonal");
  fuse->add_option("--min-obs", f.min_obs, "minimum points per voxel");
  fuse->add_option("--stride", f.stride, "pixel stride for back-projection");
  fuse->add_flag("--with-tracks", f.with_tracks, "write points2D/track links");
  fuse->add_option("--ply", f.ply, "also write the fused cloud as ASCII PLY");
  fuse->add_option("--out", f.out, "output model directory");
  add_format(fuse);
  add_threads(fuse);

  CLI::App* init = app.add_subcommand("init-random", "uniform random point initialization");
  init->add_option("--model", f.model, "bound by this model's points, else camera centers");
  init->add_option("--ply-in", f.ply_in, "bound by this ASCII PLY cloud");
  init->add_option("--bbox", f.bbox, "explicit box x0,y0,z0,x1,y1,z1")->delimiter(',');
  init->add_option("--padding", f.padding, "grow the box by this fraction of its extent");
  init->add_option("--count", f.count, "number of points");
  init->add_option("--seed", f.seed, "RNG seed");
  init->add_option("--ply", f.ply, "also write the cloud as ASCII PLY");
  init->add_option("--out", f.out, "output model directory");
  add_format(init);

  CLI::App* enhance = app.add_subcommand("enhance", "brightness/contrast/saturation/gamma chain");
  enhance->add_option("--in", f.in, "input PNG directory or file")->required();
  enhance->add_option("--out", f.out, "output directory or file");
  enhance->add_option("--ref", f.ref, "histogram reference: directory (by basename) or file");
  enhance->add_option("--beta", f.beta, "brightness shift");
  enhance->add_option("--alpha", f.alpha, "contrast gain");
  enhance->add_option("--sat", f.sat, "saturation gain");
  enhance->add_option("--gamma", f.gamma, "gamma exponent");
  enhance->add_option("--order", f.order, "stage order, e.g. brightness,contrast,saturation,gamma");
  add_threads(enhance);

  CLI::App* match = app.add_subcommand("match-hist", "per-channel histogram matching");
  match->add_option("--in", f.in, "input PNG directory or file")->required();
  match->add_option("--ref", f.ref, "reference directory (by basename) or file")->required();
  match->add_option("--out", f.out, "output directory or file");
  add_threads(match);

  CLI::App* metrics = app.add_subcommand("metrics", "PSNR/SSIM report for a directory pair");
  metrics->add_option("--pred", f.pred, "predicted PNG directory")->required();
  metrics->add_option("--gt", f.gt, "ground-truth PNG directory")->required();
  metrics->add_option("--out", f.out, "report JSON path");
  add_threads(metrics);

  CLI::App* select = app.add_subcommand("select", "pick the best branch by mean metric");
  select->add_option("--gt", f.gt, "ground-truth PNG directory")->required();
  select->add_option("--branch", f.branches, "LABEL=DIR, repeatable")->required();
  select->add_option("--criterion", f.criterion, "psnr or ssim");
  select->add_option("--choose", f.choose, "manual override: record this label as chosen");
  select->add_option("--out", f.out, "selection JSON path");
  add_threads(select);

  if (args.empty()) {
    err << usage_text(app);
    return kExitUserError;
  }

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << usage_text(app);
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << usage_text(app);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << usage_text(app);
    return kExitUserError;
  }

  try {
    CLI::App* sub = app.get_subcommands().front();
    const PipelineConfig cfg = effective_config(f, sub);
    const std::string name = sub->get_name();
    if (name == "convert-cameras") return cmd_convert_cameras(f, cfg, out);
    if (name == "fuse-depth") return cmd_fuse_depth(f, sub, cfg, out);
    if (name == "init-random") return cmd_init_random(f, sub, cfg, out);
    if (name == "enhance") return cmd_enhance(f, sub, cfg, out);
    if (name == "match-hist") return cmd_match_hist(f, cfg, out);
    if (name == "metrics") return cmd_metrics(f, cfg, out);
    if (name == "select") return cmd_select(f, sub, cfg, out);
    err << "error: unhandled subcommand " << name << "\n";
    return kExitInternalError;
  } catch (const InputError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUserError;
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << "\n";
    return kExitUserError;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << "\n";
    return kExitInternalError;
  } catch (...) {
    err << "internal error: unknown exception\n";
    return kExitInternalError;
  }
}

}  // namespace splatprep::cli
