#include "evtexture/cli.hpp"

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <iostream>
#include <memory>

#include <openssl/evp.h>
#include <spdlog/spdlog.h>

#include "CLI11.hpp"

#include "evtexture/checkpoint.hpp"
#include "evtexture/config.hpp"
#include "evtexture/data.hpp"
#include "evtexture/evaluation.hpp"
#include "evtexture/io.hpp"
#include "evtexture/training.hpp"

namespace evtexture::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string utc_now() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace

json RunManifest::to_json() const {
  return {{"command", command},   {"argv", argv},       {"config", config},
          {"config_hash", config_hash}, {"seed", seed}, {"version", version},
          {"started_at", started_at},   {"finished_at", finished_at}};
}

std::string sha256_hex(const std::string& data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1 ||
      EVP_DigestUpdate(ctx.get(), data.data(), data.size()) != 1 ||
      EVP_DigestFinal_ex(ctx.get(), digest, &len) != 1) {
    throw std::runtime_error("sha256 failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += kHex[digest[i] >> 4];
    out += kHex[digest[i] & 0xF];
  }
  return out;
}

std::uint64_t resolve_seed(const std::string& flag_value, std::uint64_t fallback) {
  const auto parse = [](const std::string& s, const char* what) {
    try {
      std::size_t used = 0;
      const unsigned long long v = std::stoull(s, &used);
      if (used != s.size()) throw std::invalid_argument(s);
      return static_cast<std::uint64_t>(v);
    } catch (const std::exception&) {
      throw InvalidInput(std::string(what) + " is not a non-negative integer: '" + s + "'");
    }
  };
  if (!flag_value.empty()) return parse(flag_value, "--seed");
  if (const char* env = std::getenv("EVTEXTURE_SEED"); env != nullptr && *env != '\0') {
    return parse(env, "EVTEXTURE_SEED");
  }
  return fallback;
}

namespace {

struct Context {
  std::vector<std::string> argv;
  std::string started_at = utc_now();
};

void write_manifest(const Context& ctx, const std::string& command, const fs::path& out_dir,
                    const json& config, std::uint64_t seed) {
  RunManifest m;
  m.command = command;
  m.argv = ctx.argv;
  m.config = config;
  m.config_hash = sha256_hex(config.dump());
  m.seed = seed;
  m.version = kVersion;
  m.started_at = ctx.started_at;
  m.finished_at = utc_now();
  fs::create_directories(out_dir);
  write_text_file(out_dir / "manifest.json", m.to_json().dump(2) + "\n");
}

fs::path parent_or_cwd(const fs::path& file) {
  return file.has_parent_path() ? file.parent_path() : fs::path(".");
}

void require_dir(const fs::path& dir, const char* flag) {
  if (!fs::is_directory(dir)) throw IoError(std::string(flag) + ": not a directory: " + dir.string());
}

void require_file(const fs::path& file, const char* flag) {
  if (!fs::is_regular_file(file)) throw IoError(std::string(flag) + ": no such file: " + file.string());
}

bool parse_switch(const std::string& v, const char* flag) {
  if (v == "on" || v == "true" || v == "1") return true;
  if (v == "off" || v == "false" || v == "0") return false;
  throw InvalidInput(std::string(flag) + " must be on or off");
}

/// Interval voxels for LR frames. Events recorded at a higher resolution
/// than the frames are shrunk by the integer ratio.
std::vector<VoxelGrid> infer_voxels(const EventStream& events, const FrameSequence& lr, int bins) {
  const int h = lr[0].height();
  const int w = lr[0].width();
  if (events.width % w != 0 || events.height % h != 0 || events.width / w != events.height / h) {
    throw InvalidInput("event sensor " + std::to_string(events.width) + "x" +
                       std::to_string(events.height) + " is not an integer multiple of the frames");
  }
  return interval_voxels(events, lr.size(), lr.fps, bins, events.width / w, nullptr);
}

// ---------------------------------------------------------------- commands

struct SimulateArgs {
  std::string frames, out, seed;
  double fps = 25.0;
  SimulatorConfig sim;
};

int run_simulate(const Context& ctx, const SimulateArgs& a) {
  require_dir(a.frames, "--frames");
  SimulatorConfig sim = a.sim;
  sim.rng_seed = resolve_seed(a.seed, sim.rng_seed);
  sim.validate();
  if (!(a.fps > 0.0)) throw InvalidInput("--fps must be positive");
  const FrameSequence frames = read_frame_dir(a.frames, a.fps);
  const EventStream events = simulate_events(frames, sim);
  const fs::path out(a.out);
  fs::create_directories(parent_or_cwd(out));
  if (out.extension() == ".csv") {
    write_events_csv(out, events);
  } else {
    write_events_binary(out, events);
  }
  std::cout << events.size() << " events written to " << out.string() << "\n";
  write_manifest(ctx, "simulate", parent_or_cwd(out),
                 {{"frames", a.frames},
                  {"fps", a.fps},
                  {"contrast_mean", sim.contrast_mean},
                  {"contrast_std", sim.contrast_std},
                  {"interp_steps", sim.interp_steps},
                  {"log_eps", sim.log_eps}},
                 sim.rng_seed);
  return kOk;
}

struct VoxelizeArgs {
  std::string events, out;
  int bins = 5;
  int frames = 0;
  double fps = 25.0;
  int width = 0, height = 0, scale = 1;
  bool raw = false;
};

int run_voxelize(const Context& ctx, const VoxelizeArgs& a) {
  require_file(a.events, "--events");
  if (a.bins < 2) throw InvalidInput("--bins must be >= 2");
  if (a.frames == 1 || a.frames < 0) throw InvalidInput("--frames must be 0 or >= 2");
  if (a.scale < 1) throw InvalidInput("--scale must be >= 1");
  const EventStream events = read_events(a.events, a.width, a.height);
  std::vector<EventStream> parts;
  if (a.frames >= 2) {
    std::vector<double> stamps;
    for (int k = 0; k < a.frames; ++k) stamps.push_back(k * (1.0 / a.fps));
    parts = split_at(events, stamps);
  } else {
    parts.push_back(events);
  }
  std::vector<VoxelGrid> grids;
  for (const EventStream& s : parts) {
    VoxelGrid g = voxelize(s, a.bins);
    if (!a.raw) g = normalize_voxel(g);
    if (a.scale > 1) g = downsample_voxel(g, a.scale);
    grids.push_back(std::move(g));
  }
  const fs::path out(a.out);
  fs::create_directories(out);
  for (std::size_t i = 0; i < grids.size(); ++i) {
    char name[32];
    std::snprintf(name, sizeof(name), "voxel_%04zu.npy", i);
    write_voxel(out / name, grids[i]);
  }
  std::cout << grids.size() << " voxel grid(s) written to " << out.string() << "\n";
  write_manifest(ctx, "voxelize", out,
                 {{"events", a.events},
                  {"bins", a.bins},
                  {"frames", a.frames},
                  {"fps", a.fps},
                  {"scale", a.scale},
                  {"normalized", !a.raw}},
                 0);
  return kOk;
}

struct SynthArgs {
  std::string kind = "checkerboard", out, seed;
  int count = 1;
  SynthOptions opts;
};

int run_synth(const Context& ctx, const SynthArgs& a) {
  SynthOptions o = a.opts;
  o.kind = pattern_from_string(a.kind);
  o.seed = resolve_seed(a.seed, 0);
  if (a.count < 1) throw InvalidInput("--count must be >= 1");
  o.validate();
  const fs::path out(a.out);
  json clips = json::array();
  for (int i = 0; i < a.count; ++i) {
    SynthOptions oi = o;
    oi.seed = o.seed + static_cast<std::uint64_t>(i);
    const ClipRecord clip = synth_clip(oi);
    write_clip(clip, out / clip.name, o.bins);
    clips.push_back({{"name", clip.name}, {"texture_magnitude", clip.texture_magnitude}});
    std::cout << clip.name << " texture magnitude " << clip.texture_magnitude << "\n";
  }
  write_manifest(ctx, "synth-data", out,
                 {{"kind", a.kind},
                  {"count", a.count},
                  {"frames", o.frames},
                  {"height", o.height},
                  {"width", o.width},
                  {"vx", o.vx},
                  {"vy", o.vy},
                  {"scale", o.scale},
                  {"bins", o.bins},
                  {"fps", o.fps},
                  {"contrast_mean", o.simulator.contrast_mean},
                  {"contrast_std", o.simulator.contrast_std},
                  {"clips", clips}},
                 o.seed);
  return kOk;
}

struct TrainOverrides {
  std::string config, out, seed;
  int iters = -1, batch = -1, crop = -1, seq_len = -1, channels = -1;
  double lr = -1.0;
};

ExperimentConfig experiment_with_overrides(const TrainOverrides& a) {
  ExperimentConfig cfg;
  if (!a.config.empty()) {
    require_file(a.config, "--config");
    cfg = load_experiment(a.config);
  }
  cfg.train.seed = resolve_seed(a.seed, cfg.train.seed);
  if (a.iters >= 0) cfg.train.total_iters = a.iters;
  if (a.batch > 0) cfg.train.batch = a.batch;
  if (a.crop > 0) cfg.train.crop = a.crop;
  if (a.seq_len > 0) cfg.train.seq_len = a.seq_len;
  if (a.channels > 0) cfg.network.channels = a.channels;
  if (a.lr > 0.0) cfg.train.lr_main = a.lr;
  return cfg;
}

json run_training(const ExperimentConfig& cfg, const fs::path& out) {
  cfg.validate();
  const std::vector<ClipRecord> clips = training_clips(cfg);
  const ClipRecord val = validation_clip(cfg);
  EvTextureNet<float> net(cfg.network, cfg.train.seed);
  spdlog::info("model: {} parameters, {} training clips", net.params().scalar_count(), clips.size());
  TrainOptions opts;
  opts.out_dir = out;
  const TrainResult r = train(net, clips, &val, cfg.train, opts);
  return {{"parameters", net.params().scalar_count()},
          {"bicubic_val_psnr", r.bicubic_val_psnr},
          {"final_val_psnr", r.final_val_psnr}};
}

int run_train(const Context& ctx, const TrainOverrides& a) {
  const ExperimentConfig cfg = experiment_with_overrides(a);
  cfg.validate();
  const fs::path out(a.out);
  const json summary = run_training(cfg, out);
  write_text_file(out / "summary.json", summary.dump(2) + "\n");
  std::cout << summary.dump() << "\n";
  write_manifest(ctx, "train", out, to_json(cfg), cfg.train.seed);
  return kOk;
}

struct InferArgs {
  std::string frames, events, ckpt, out, gt;
  int scale = 4;
  double fps = 25.0;
};

int run_infer(const Context& ctx, const InferArgs& a) {
  require_dir(a.frames, "--frames");
  require_file(a.events, "--events");
  require_file(a.ckpt, "--ckpt");
  if (!a.gt.empty()) require_dir(a.gt, "--gt");
  const Checkpoint ckpt = load_checkpoint(a.ckpt);
  if (ckpt.config.scale != a.scale) {
    throw InvalidInput("--scale " + std::to_string(a.scale) + " does not match the checkpoint (" +
                       std::to_string(ckpt.config.scale) + ")");
  }
  const FrameSequence lr = read_frame_dir(a.frames, a.fps);
  if (lr.size() < 2) throw InvalidInput("--frames: need at least 2 frames");
  const EventStream events = read_events(a.events, lr[0].width(), lr[0].height());
  const std::vector<VoxelGrid> voxels = infer_voxels(events, lr, ckpt.config.bins);
  FrameSequence gt;
  if (!a.gt.empty()) {
    gt = read_frame_dir(a.gt, a.fps);
    if (gt.size() != lr.size()) throw InvalidInput("--gt frame count differs from --frames");
  }

  EvTextureNet<float> net(ckpt.config, 0);
  apply_checkpoint(ckpt, net);
  FrameSequence sr = net.infer(lr, voxels);
  for (Image& f : sr.frames) f.matrix() = f.matrix().cwiseMax(0.0f).cwiseMin(1.0f);

  const fs::path out(a.out);
  write_frame_dir(out, sr);
  const TextureReport texture = texture_magnitude(sr);
  const std::string clip = fs::path(a.frames).filename().string();
  json report;
  if (!a.gt.empty()) {
    report = report_json(clip, evaluate_sequence(sr, gt, ChannelMode::kY, 0), &texture);
  } else {
    report = texture_report_json(clip, texture);
  }
  write_text_file(out / "metrics.json", report.dump(2) + "\n");
  std::cout << sr.size() << " frames written to " << out.string() << "\n";
  write_manifest(ctx, "infer", out,
                 {{"frames", a.frames},
                  {"events", a.events},
                  {"ckpt", a.ckpt},
                  {"scale", a.scale},
                  {"fps", a.fps},
                  {"network", to_json(ckpt.config)}},
                 0);
  return kOk;
}

struct EvalArgs {
  std::string pred, gt, out, mode = "Y";
  int border = 0;
};

int run_eval(const Context& ctx, const EvalArgs& a) {
  require_dir(a.pred, "--pred");
  require_dir(a.gt, "--gt");
  const ChannelMode mode = channel_mode_from_string(a.mode);
  if (a.border < 0) throw InvalidInput("--border must be >= 0");
  const FrameSequence pred = read_frame_dir(a.pred);
  const FrameSequence gt = read_frame_dir(a.gt);
  const MetricReport metrics = evaluate_sequence(pred, gt, mode, a.border);
  const TextureReport texture = texture_magnitude(gt);
  const json report = report_json(fs::path(a.gt).filename().string(), metrics, &texture);
  const fs::path out(a.out);
  fs::create_directories(parent_or_cwd(out));
  write_text_file(out, report.dump(2) + "\n");
  std::cout << "PSNR " << report["psnr"].dump() << " SSIM " << report["ssim"].dump() << "\n";
  write_manifest(ctx, "eval", parent_or_cwd(out),
                 {{"pred", a.pred}, {"gt", a.gt}, {"mode", a.mode}, {"border", a.border}}, 0);
  return kOk;
}

struct TextureArgs {
  std::string frames, out;
  double alpha = 10.0;
};

int run_texture(const Context& ctx, const TextureArgs& a) {
  require_dir(a.frames, "--frames");
  TextureOptions opts;
  opts.alpha = a.alpha;
  const TextureReport r = texture_magnitude(read_frame_dir(a.frames), opts);
  std::cout << json(r.magnitude).dump() << "\n";
  if (!a.out.empty()) {
    const fs::path out(a.out);
    fs::create_directories(parent_or_cwd(out));
    write_text_file(out, texture_report_json(fs::path(a.frames).filename().string(), r).dump(2) +
                             "\n");
    write_manifest(ctx, "texture-mag", parent_or_cwd(out),
                   {{"frames", a.frames}, {"alpha", a.alpha}, {"ksize", 5}, {"sigma", 1.5}}, 0);
  }
  return kOk;
}

struct ProfileArgs {
  std::string frames, out;
  int column = 0;
};

int run_profile(const Context& ctx, const ProfileArgs& a) {
  require_dir(a.frames, "--frames");
  const Image profile = temporal_profile(read_frame_dir(a.frames), a.column);
  const fs::path out(a.out);
  fs::create_directories(parent_or_cwd(out));
  write_png(out, profile);
  std::cout << "profile " << profile.height() << "x" << profile.width() << " written to "
            << out.string() << "\n";
  write_manifest(ctx, "profile", parent_or_cwd(out), {{"frames", a.frames}, {"column", a.column}},
                 0);
  return kOk;
}

struct AblateArgs {
  TrainOverrides train;
  std::string variant = "evtexture", updater, iterative, residual;
  int iterations = 0;
  bool build_only = false;
};

int run_ablate(const Context& ctx, const AblateArgs& a) {
  ExperimentConfig cfg = experiment_with_overrides(a.train);
  cfg.network = ablation_variant(a.variant, cfg.network);
  if (!a.updater.empty()) cfg.network.updater = updater_from_string(a.updater);
  if (!a.iterative.empty()) cfg.network.iterative = parse_switch(a.iterative, "--iterative");
  if (!a.residual.empty()) cfg.network.residual = parse_switch(a.residual, "--residual");
  if (a.iterations != 0) {
    if (a.iterations != 3 && a.iterations != 5 && a.iterations != 8) {
      throw InvalidInput("--iterations must be 3, 5 or 8");
    }
    cfg.network.bins = a.iterations;
  }
  cfg.validate();
  EvTextureNet<float> probe(cfg.network, cfg.train.seed);
  json summary = {{"variant", a.variant},
                  {"network", to_json(cfg.network)},
                  {"parameters", probe.params().scalar_count()}};
  if (!a.build_only) {
    if (a.train.out.empty()) throw InvalidInput("--out is required unless --build-only");
    summary.update(run_training(cfg, a.train.out));
  }
  std::cout << summary.dump(2) << "\n";
  if (!a.train.out.empty()) {
    const fs::path out(a.train.out);
    fs::create_directories(out);
    write_text_file(out / "summary.json", summary.dump(2) + "\n");
    write_manifest(ctx, "ablate", out, to_json(cfg), cfg.train.seed);
  }
  return kOk;
}

void add_train_overrides(CLI::App* cmd, TrainOverrides& t) {
  cmd->add_option("--config", t.config, "YAML experiment config");
  cmd->add_option("--seed", t.seed, "Seed (falls back to EVTEXTURE_SEED, then the config)");
  cmd->add_option("--iters", t.iters, "Override train.total_iters");
  cmd->add_option("--batch", t.batch, "Override train.batch");
  cmd->add_option("--crop", t.crop, "Override train.crop (LR pixels)");
  cmd->add_option("--seq-len", t.seq_len, "Override train.seq_len");
  cmd->add_option("--channels", t.channels, "Override network.channels");
  cmd->add_option("--lr", t.lr, "Override train.lr_main");
}

}  // namespace

int dispatch(const std::vector<std::string>& args) {
  Context ctx;
  ctx.argv = args;
  CLI::App app{"Event-driven texture-enhanced video super-resolution toolkit", "evtexture"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);

  SimulateArgs sim;
  auto* simulate = app.add_subcommand("simulate", "Simulate events from a frame directory");
  simulate->add_option("--frames", sim.frames, "Directory of PNG frames")->required();
  simulate->add_option("--out", sim.out, "Output event file (.evt1 or .csv)")->required();
  simulate->add_option("--fps", sim.fps, "Frame rate");
  simulate->add_option("--contrast-mean", sim.sim.contrast_mean, "Mean contrast threshold");
  simulate->add_option("--contrast-std", sim.sim.contrast_std, "Threshold standard deviation");
  simulate->add_option("--interp-steps", sim.sim.interp_steps, "Sub-steps between frames");
  simulate->add_option("--seed", sim.seed, "Threshold sampling seed");

  VoxelizeArgs vox;
  auto* voxelize_cmd = app.add_subcommand("voxelize", "Bin an event file into voxel grids");
  voxelize_cmd->add_option("--events", vox.events, "Event file (.evt1 or .csv)")->required();
  voxelize_cmd->add_option("--out", vox.out, "Output directory")->required();
  voxelize_cmd->add_option("--bins", vox.bins, "Temporal bins");
  voxelize_cmd->add_option("--frames", vox.frames,
                           "Split at N frame timestamps k/fps into N-1 grids (0: one grid)");
  voxelize_cmd->add_option("--fps", vox.fps, "Frame rate used with --frames");
  voxelize_cmd->add_option("--width", vox.width, "Sensor width (CSV input)");
  voxelize_cmd->add_option("--height", vox.height, "Sensor height (CSV input)");
  voxelize_cmd->add_option("--scale", vox.scale, "Bicubic shrink factor");
  voxelize_cmd->add_flag("--raw", vox.raw, "Skip normalization");

  SynthArgs syn;
  auto* synth = app.add_subcommand("synth-data", "Write synthetic clips");
  synth->add_option("--out", syn.out, "Output directory")->required();
  synth->add_option("--kind", syn.kind, "checkerboard, perlin or moving-text");
  synth->add_option("--count", syn.count, "Number of clips");
  synth->add_option("--frames", syn.opts.frames, "Frames per clip");
  synth->add_option("--height", syn.opts.height, "HR height");
  synth->add_option("--width", syn.opts.width, "HR width");
  synth->add_option("--vx", syn.opts.vx, "Horizontal velocity, px/frame");
  synth->add_option("--vy", syn.opts.vy, "Vertical velocity, px/frame");
  synth->add_option("--scale", syn.opts.scale, "Downsampling factor");
  synth->add_option("--bins", syn.opts.bins, "Voxel bins");
  synth->add_option("--fps", syn.opts.fps, "Frame rate");
  synth->add_option("--contrast-std", syn.opts.simulator.contrast_std, "Threshold std");
  synth->add_option("--seed", syn.seed, "Seed of the first clip");

  TrainOverrides tr;
  auto* train_cmd = app.add_subcommand("train", "Train a model");
  add_train_overrides(train_cmd, tr);
  train_cmd->add_option("--out", tr.out, "Output directory")->required();

  InferArgs inf;
  auto* infer = app.add_subcommand("infer", "Super-resolve a frame directory");
  infer->add_option("--frames", inf.frames, "LR PNG frames")->required();
  infer->add_option("--events", inf.events, "Event file covering the frames")->required();
  infer->add_option("--ckpt", inf.ckpt, "Checkpoint")->required();
  infer->add_option("--out", inf.out, "Output directory")->required();
  infer->add_option("--scale", inf.scale, "Upsampling factor (must match the checkpoint)");
  infer->add_option("--fps", inf.fps, "Frame rate; frame k is at k/fps");
  infer->add_option("--gt", inf.gt, "Optional HR ground-truth frames for metrics");

  EvalArgs ev;
  auto* eval = app.add_subcommand("eval", "PSNR/SSIM of predicted frames");
  eval->add_option("--pred", ev.pred, "Predicted frames")->required();
  eval->add_option("--gt", ev.gt, "Ground-truth frames")->required();
  eval->add_option("--out", ev.out, "Report JSON path")->required();
  eval->add_option("--mode", ev.mode, "Y or RGB");
  eval->add_option("--border", ev.border, "Pixels cropped from each side");

  TextureArgs tex;
  auto* texture = app.add_subcommand("texture-mag", "Clip texture magnitude");
  texture->add_option("--frames", tex.frames, "Frame directory")->required();
  texture->add_option("--out", tex.out, "Optional report JSON path");
  texture->add_option("--alpha", tex.alpha, "Scale factor");

  ProfileArgs prof;
  auto* profile = app.add_subcommand("profile", "Temporal profile of one column");
  profile->add_option("--frames", prof.frames, "Frame directory")->required();
  profile->add_option("--column", prof.column, "Column index")->required();
  profile->add_option("--out", prof.out, "Output PNG")->required();

  AblateArgs abl;
  auto* ablate = app.add_subcommand("ablate", "Build and train an ablation variant");
  add_train_overrides(ablate, abl.train);
  ablate->add_option("--out", abl.train.out, "Output directory");
  ablate->add_option("--variant", abl.variant,
                     "evtexture, model-a ... model-g");
  ablate->add_option("--updater", abl.updater, "convgru or conv");
  ablate->add_option("--iterative", abl.iterative, "on or off");
  ablate->add_option("--residual", abl.residual, "on or off");
  ablate->add_option("--iterations", abl.iterations, "3, 5 or 8");
  ablate->add_flag("--build-only", abl.build_only, "Build the variant and report it, no training");

  std::vector<std::string> reversed(args.rbegin(), args.rend() - (args.empty() ? 0 : 1));
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kValidationError;
  }

  try {
    if (*simulate) return run_simulate(ctx, sim);
    if (*voxelize_cmd) return run_voxelize(ctx, vox);
    if (*synth) return run_synth(ctx, syn);
    if (*train_cmd) return run_train(ctx, tr);
    if (*infer) return run_infer(ctx, inf);
    if (*eval) return run_eval(ctx, ev);
    if (*texture) return run_texture(ctx, tex);
    if (*profile) return run_profile(ctx, prof);
    if (*ablate) return run_ablate(ctx, abl);
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kIoError;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kIoError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kValidationError;
  }
  return kValidationError;
}

int dispatch(int argc, char** argv) { return dispatch(std::vector<std::string>(argv, argv + argc)); }

}  // namespace evtexture::cli
