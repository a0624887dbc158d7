#include "evtexture/data.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <random>

#include <spdlog/spdlog.h>

#include "json.hpp"

#include "evtexture/evaluation.hpp"
#include "evtexture/io.hpp"
#include "evtexture/resample.hpp"

namespace evtexture {

namespace fs = std::filesystem;

void ClipRecord::validate() const {
  const int t = lr_frames.size();
  if (t < 2) throw InvalidInput("clip " + name + ": need at least 2 frames");
  if (static_cast<int>(lr_voxels.size()) != t - 1) {
    throw InvalidInput("clip " + name + ": " + std::to_string(lr_voxels.size()) +
                       " voxel grids for " + std::to_string(t) + " frames");
  }
  if (hr_frames.size() != t) throw InvalidInput("clip " + name + ": HR/LR frame counts differ");
  for (int i = 0; i < t; ++i) {
    const Image& hr = hr_frames[i];
    const Image& lr = lr_frames[i];
    if (hr.height() != lr.height() * scale || hr.width() != lr.width() * scale) {
      throw InvalidInput("clip " + name + ": HR is not " + std::to_string(scale) + "x LR");
    }
  }
  for (const VoxelGrid& v : lr_voxels) {
    if (v.height() != lr_frames[0].height() || v.width() != lr_frames[0].width()) {
      throw InvalidInput("clip " + name + ": voxel grid does not match LR frame size");
    }
  }
}

std::string to_string(PatternKind kind) {
  switch (kind) {
    case PatternKind::kCheckerboard: return "checkerboard";
    case PatternKind::kPerlin: return "perlin";
    case PatternKind::kMovingText: return "moving-text";
  }
  return "checkerboard";
}

PatternKind pattern_from_string(const std::string& name) {
  if (name == "checkerboard") return PatternKind::kCheckerboard;
  if (name == "perlin" || name == "perlin-texture") return PatternKind::kPerlin;
  if (name == "moving-text" || name == "text") return PatternKind::kMovingText;
  throw InvalidInput("unknown pattern '" + name + "' (checkerboard, perlin, moving-text)");
}

void SynthOptions::validate() const {
  if (frames < 2) throw InvalidInput("synth: need at least 2 frames");
  if (scale != 2 && scale != 4) throw InvalidInput("synth: scale must be 2 or 4");
  if (height <= 0 || width <= 0 || height % (4 * scale) != 0 || width % (4 * scale) != 0) {
    throw InvalidInput("synth: H and W must be positive multiples of " + std::to_string(4 * scale));
  }
  if (std::hypot(vx, vy) > 4.0) throw InvalidInput("synth: |velocity| must be <= 4 px/frame");
  if (bins < 2) throw InvalidInput("synth: bins must be >= 2");
  if (!(fps > 0.0)) throw InvalidInput("synth: fps must be positive");
  simulator.validate();
}

FrameSequence make_lr(const FrameSequence& hr, int scale) {
  FrameSequence lr;
  lr.fps = hr.fps;
  lr.frames.reserve(hr.frames.size());
  for (const Image& f : hr.frames) lr.frames.push_back(downsample_bicubic(f, scale));
  return lr;
}

namespace {

using Plane = Eigen::MatrixXd;

Plane checkerboard(int h, int w, std::mt19937_64& rng) {
  std::uniform_int_distribution<int> cell_dist(6, 12);
  std::uniform_int_distribution<int> offset_dist(0, 11);
  const int cell = cell_dist(rng);
  const int oy = offset_dist(rng);
  const int ox = offset_dist(rng);
  Plane p(h, w);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) p(y, x) = ((y + oy) / cell + (x + ox) / cell) % 2;
  }
  return p;
}

double fade(double t) { return t * t * t * (t * (t * 6 - 15) + 10); }

/// Sum of gradient-noise octaves, rank-equalized to a uniform spread over
/// [0, 1].
Plane perlin(int h, int w, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> angle(0.0, 2.0 * M_PI);
  Plane out = Plane::Zero(h, w);
  double amplitude = 1.0;
  for (int period : {16, 8, 4}) {
    const int gh = h / period + 2;
    const int gw = w / period + 2;
    Eigen::MatrixXd gx(gh, gw);
    Eigen::MatrixXd gy(gh, gw);
    for (int i = 0; i < gh; ++i) {
      for (int j = 0; j < gw; ++j) {
        const double a = angle(rng);
        gx(i, j) = std::cos(a);
        gy(i, j) = std::sin(a);
      }
    }
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        const double fy = static_cast<double>(y) / period;
        const double fx = static_cast<double>(x) / period;
        const int iy = static_cast<int>(fy);
        const int ix = static_cast<int>(fx);
        const double dy = fy - iy;
        const double dx = fx - ix;
        const auto dot = [&](int cy, int cx) {
          return gx(iy + cy, ix + cx) * (dx - cx) + gy(iy + cy, ix + cx) * (dy - cy);
        };
        const double top = dot(0, 0) + fade(dx) * (dot(0, 1) - dot(0, 0));
        const double bottom = dot(1, 0) + fade(dx) * (dot(1, 1) - dot(1, 0));
        out(y, x) += amplitude * (top + fade(dy) * (bottom - top));
      }
    }
    amplitude *= 0.8;
  }
  std::vector<std::pair<double, Eigen::Index>> order;
  for (Eigen::Index i = 0; i < out.size(); ++i) order.emplace_back(out.data()[i], i);
  std::sort(order.begin(), order.end());
  const auto last = static_cast<double>(order.size() - 1);
  for (std::size_t r = 0; r < order.size(); ++r) {
    out.data()[order[r].second] = last > 0 ? static_cast<double>(r) / last : 0.0;
  }
  return out;
}

// 3x5 digit glyphs, one row per string, '#' set.
constexpr std::array<std::array<const char*, 5>, 10> kDigits = {{
    {"###", "#.#", "#.#", "#.#", "###"}, {".#.", "##.", ".#.", ".#.", "###"},
    {"###", "..#", "###", "#..", "###"}, {"###", "..#", "###", "..#", "###"},
    {"#.#", "#.#", "###", "..#", "..#"}, {"###", "#..", "###", "..#", "###"},
    {"###", "#..", "###", "#.#", "###"}, {"###", "..#", ".#.", ".#.", ".#."},
    {"###", "#.#", "###", "#.#", "###"}, {"###", "#.#", "###", "..#", "###"},
}};

Plane moving_text(int h, int w, std::mt19937_64& rng) {
  std::uniform_int_distribution<int> digit(0, 9);
  std::uniform_int_distribution<int> px_dist(1, 2);
  const int px = px_dist(rng);
  const int gw = 4 * px;
  const int gh = 6 * px;
  Plane p = Plane::Constant(h, w, 0.1);
  for (int top = 1; top + 5 * px <= h; top += gh) {
    for (int left = 1; left + 3 * px <= w; left += gw) {
      const auto& glyph = kDigits[static_cast<std::size_t>(digit(rng))];
      for (int r = 0; r < 5; ++r) {
        for (int c = 0; c < 3; ++c) {
          if (glyph[static_cast<std::size_t>(r)][c] != '#') continue;
          p.block(top + r * px, left + c * px, px, px).setConstant(0.9);
        }
      }
    }
  }
  return p;
}

double bilinear(const Plane& p, double y, double x) {
  const int y0 = static_cast<int>(std::floor(y));
  const int x0 = static_cast<int>(std::floor(x));
  const double fy = y - y0;
  const double fx = x - x0;
  const auto at = [&](int yy, int xx) {
    return p(std::clamp(yy, 0, static_cast<int>(p.rows()) - 1),
             std::clamp(xx, 0, static_cast<int>(p.cols()) - 1));
  };
  const double top = fx == 0.0 ? at(y0, x0) : at(y0, x0) + fx * (at(y0, x0 + 1) - at(y0, x0));
  if (fy == 0.0) return top;
  const double bottom =
      fx == 0.0 ? at(y0 + 1, x0) : at(y0 + 1, x0) + fx * (at(y0 + 1, x0 + 1) - at(y0 + 1, x0));
  return top + fy * (bottom - top);
}

}  // namespace

std::vector<VoxelGrid> interval_voxels(const EventStream& stream, int frames, double fps,
                                       int bins, int scale, std::vector<EventStream>* intervals) {
  const double dt = 1.0 / fps;
  std::vector<double> stamps;
  for (int k = 0; k < frames; ++k) stamps.push_back(k * dt);
  std::size_t dropped = 0;
  std::vector<EventStream> parts = split_at(stream, stamps, &dropped);
  if (dropped > 0) spdlog::warn("{} events fall outside the frame time span", dropped);

  std::vector<VoxelGrid> voxels;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    const EventStream& part = parts[i];
    VoxelGrid grid;
    if (part.empty()) {
      spdlog::warn("interval {} has no events; using a zero voxel grid", i);
      grid = voxelize_window(part, bins, part.t_start, part.t_end);
    } else {
      try {
        grid = voxelize(part, bins);
      } catch (const DegenerateStream&) {
        spdlog::warn("interval {}: all events share one timestamp; binning over the frame interval",
                     i);
        grid = voxelize_window(part, bins, part.t_start, part.t_end);
      }
    }
    voxels.push_back(downsample_voxel(normalize_voxel(grid), scale));
  }
  if (intervals != nullptr) *intervals = std::move(parts);
  return voxels;
}

ClipRecord synth_clip(const SynthOptions& opts) {
  opts.validate();
  std::mt19937_64 rng(opts.seed);
  const int margin =
      static_cast<int>(std::ceil(std::max(std::abs(opts.vx), std::abs(opts.vy)) * (opts.frames - 1))) + 2;
  const int ch = opts.height + 2 * margin;
  const int cw = opts.width + 2 * margin;
  Plane canvas;
  switch (opts.kind) {
    case PatternKind::kCheckerboard: canvas = checkerboard(ch, cw, rng); break;
    case PatternKind::kPerlin: canvas = perlin(ch, cw, rng); break;
    case PatternKind::kMovingText: canvas = moving_text(ch, cw, rng); break;
  }
  std::uniform_real_distribution<double> tint(0.0, 1.0);
  std::array<double, 3> lo{};
  std::array<double, 3> hi{};
  for (int c = 0; c < 3; ++c) {
    lo[static_cast<std::size_t>(c)] = 0.02 + 0.04 * tint(rng);
    hi[static_cast<std::size_t>(c)] = 0.15 + 0.2 * tint(rng);
  }

  ClipRecord clip;
  clip.name = to_string(opts.kind) + "_" + std::to_string(opts.seed);
  clip.scale = opts.scale;
  clip.hr_frames.fps = opts.fps;
  for (int t = 0; t < opts.frames; ++t) {
    Image frame(3, opts.height, opts.width);
    for (int y = 0; y < opts.height; ++y) {
      for (int x = 0; x < opts.width; ++x) {
        const double v = bilinear(canvas, y + margin - opts.vy * t, x + margin - opts.vx * t);
        for (int c = 0; c < 3; ++c) {
          const auto i = static_cast<std::size_t>(c);
          frame(c, y, x) = quantize_u8(static_cast<float>(lo[i] * std::pow(hi[i] / lo[i], v)));
        }
      }
    }
    clip.hr_frames.frames.push_back(std::move(frame));
  }
  clip.lr_frames = make_lr(clip.hr_frames, opts.scale);

  SimulatorConfig sim = opts.simulator;
  sim.rng_seed = opts.seed ^ 0x5eed5eedULL;
  const EventStream events = simulate_events(clip.hr_frames, sim);
  clip.lr_voxels =
      interval_voxels(events, opts.frames, opts.fps, opts.bins, opts.scale, &clip.hr_events);
  clip.texture_magnitude = texture_magnitude(clip.hr_frames).magnitude;
  return clip;
}

void write_clip(const ClipRecord& clip, const fs::path& dir, int bins) {
  clip.validate();
  write_frame_dir(dir / "hr", clip.hr_frames);
  EventStream all;
  all.width = clip.hr_frames[0].width();
  all.height = clip.hr_frames[0].height();
  for (const EventStream& s : clip.hr_events) {
    all.events.insert(all.events.end(), s.events.begin(), s.events.end());
  }
  if (!all.events.empty()) {
    all.t_start = all.events.front().t;
    all.t_end = all.events.back().t;
  }
  write_events_binary(dir / "events.evt1", all);
  const nlohmann::json meta = {{"name", clip.name},
                               {"fps", clip.hr_frames.fps},
                               {"scale", clip.scale},
                               {"bins", bins}};
  write_text_file(dir / "meta.json", meta.dump(2) + "\n");
}

ClipRecord ingest_clip(const fs::path& frame_dir, const fs::path& event_file, int scale, int bins,
                       double fps) {
  if (scale != 2 && scale != 4) throw InvalidInput("ingest: scale must be 2 or 4");
  if (bins < 2) throw InvalidInput("ingest: bins must be >= 2");
  ClipRecord clip;
  clip.name = frame_dir.parent_path().filename().string();
  clip.scale = scale;
  clip.hr_frames = read_frame_dir(frame_dir, fps);
  if (clip.hr_frames.size() < 2) {
    throw InvalidInput("ingest: " + frame_dir.string() + " holds fewer than 2 frames");
  }
  const int h = clip.hr_frames[0].height();
  const int w = clip.hr_frames[0].width();
  if (h % scale != 0 || w % scale != 0) {
    throw InvalidInput("ingest: frame size " + clip.hr_frames[0].shape_string() +
                       " not divisible by scale " + std::to_string(scale));
  }
  EventStream events = read_events(event_file, w, h);
  if (events.width != w || events.height != h) {
    throw InvalidInput("ingest: event sensor " + std::to_string(events.width) + "x" +
                       std::to_string(events.height) + " does not match frames");
  }
  clip.lr_frames = make_lr(clip.hr_frames, scale);
  clip.lr_voxels = interval_voxels(events, clip.hr_frames.size(), fps, bins, scale, &clip.hr_events);
  clip.texture_magnitude = texture_magnitude(clip.hr_frames).magnitude;
  return clip;
}

ClipRecord ingest_clip_dir(const fs::path& dir) {
  const fs::path meta_path = dir / "meta.json";
  nlohmann::json meta;
  try {
    meta = nlohmann::json::parse(read_text_file(meta_path));
  } catch (const nlohmann::json::exception& e) {
    throw IoError("malformed " + meta_path.string() + ": " + e.what());
  }
  const double fps = meta.value("fps", 25.0);
  const int scale = meta.value("scale", 4);
  const int bins = meta.value("bins", 5);
  ClipRecord clip = ingest_clip(dir / "hr", dir / "events.evt1", scale, bins, fps);
  clip.name = meta.value("name", dir.filename().string());
  return clip;
}

std::vector<ClipRecord> synth_corpus(int count, const SynthOptions& base, std::uint64_t seed,
                                     const std::vector<PatternKind>& kinds) {
  if (kinds.empty()) throw InvalidInput("synth_corpus: no pattern kinds");
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> vel(-2, 2);
  std::vector<ClipRecord> clips;
  for (int i = 0; i < count; ++i) {
    SynthOptions o = base;
    o.kind = kinds[static_cast<std::size_t>(i) % kinds.size()];
    do {
      o.vx = vel(rng);
      o.vy = vel(rng);
    } while (o.vx == 0 && o.vy == 0);
    o.seed = rng();
    clips.push_back(synth_clip(o));
  }
  return clips;
}

}  // namespace evtexture
