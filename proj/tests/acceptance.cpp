// Acceptance run: one PASS/FAIL line per criterion, exit status 1 when any
// criterion fails. Tolerances are fixed below.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "evtexture/config.hpp"
#include "evtexture/data.hpp"
#include "evtexture/evaluation.hpp"
#include "evtexture/events.hpp"
#include "evtexture/io.hpp"
#include "evtexture/network.hpp"
#include "evtexture/resample.hpp"
#include "evtexture/training.hpp"
#include "support.hpp"

using namespace evtexture;
namespace tst = evtexture::testing;
namespace fs = std::filesystem;
using ad::Var;

namespace {

constexpr double kVoxelTol = 1e-9;
constexpr double kVoxelSeconds = 5.0;
constexpr double kIdentityTol = 1e-6;
constexpr double kTelescopeTol = 1e-6;
constexpr double kGradRelTol = 1e-3;
constexpr double kGradFloor = 1e-8;
constexpr double kGradSeconds = 120.0;
constexpr double kTrainMarginDb = 0.5;
constexpr double kTrainSeconds = 1800.0;
constexpr double kTextureTol = 1e-9;
constexpr double kPsnrTol = 0.01;
constexpr double kEventFlowTol = 1e-6;

struct Outcome {
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fmt(double v, int precision = 4) {
  std::ostringstream s;
  s.precision(precision);
  s << v;
  return s.str();
}

// --- 1 -----------------------------------------------------------------------

Outcome voxel_oracle_equivalence() {
  const auto start = Clock::now();
  std::mt19937_64 rng(1001);
  std::uniform_int_distribution<int> count(2, 500);
  std::uniform_int_distribution<int> side(4, 24);
  const int choices[] = {2, 5, 8};
  double worst = 0.0;
  double worst_sum = 0.0;
  for (int k = 0; k < 50; ++k) {
    const int bins = choices[k % 3];
    const EventStream s = tst::random_stream(rng, count(rng), side(rng), side(rng));
    const VoxelGrid g = voxelize(s, bins);
    worst = std::max(worst, tst::max_abs_diff(g.bins, tst::voxel_oracle(s, bins)));
    const double t0 = s.events.front().t;
    const double tn = s.events.back().t;
    for (const Event& e : s.events) {
      const double u = (e.t - t0) / (tn - t0) * (bins - 1);
      double total = 0.0;
      for (int i = 0; i < bins; ++i) total += std::max(0.0, 1.0 - std::abs(i - u));
      worst_sum = std::max(worst_sum, std::abs(total - 1.0));
    }
  }
  const double elapsed = seconds_since(start);
  return {worst <= kVoxelTol && worst_sum <= kVoxelTol && elapsed < kVoxelSeconds,
          "max err " + fmt(worst) + ", weight-sum err " + fmt(worst_sum) + ", " +
              fmt(elapsed, 3) + " s"};
}

// --- 2 -----------------------------------------------------------------------

Outcome normalization_range() {
  std::mt19937_64 rng(1002);
  std::size_t outside = 0;
  std::size_t total = 0;
  for (int k = 0; k < 30; ++k) {
    const EventStream s = tst::random_stream(rng, 50 + 40 * k, 16, 12);
    const VoxelGrid n = normalize_voxel(voxelize(s, 5));
    total += static_cast<std::size_t>(n.bins.size());
    outside += static_cast<std::size_t>((n.bins.matrix().array().abs() > 1.0).count());
  }
  bool single_ok = true;
  for (const double v : {4.0, -4.0, 0.37, -1e3}) {
    VoxelGrid g;
    g.bins = Tensor<double>::zeros(5, 6, 7);
    g.bins(3, 2, 5) = v;
    const VoxelGrid n = normalize_voxel(g);
    single_ok = single_ok && n.bins(3, 2, 5) == (v > 0 ? 1.0 : -1.0) &&
                n.bins.matrix().cwiseAbs().sum() == 1.0;
  }
  return {outside == 0 && single_ok, std::to_string(outside) + "/" + std::to_string(total) +
                                         " entries outside [-1, 1], single entry " +
                                         (single_ok ? "maps to +-1" : "wrong")};
}

// --- 3 -----------------------------------------------------------------------

Outcome crossing_counts() {
  std::mt19937_64 rng(1003);
  std::uniform_real_distribution<double> base(std::log(0.03), std::log(0.3));
  std::uniform_real_distribution<double> step(0.05, 1.3);
  std::uniform_real_distribution<double> contrast(0.2, 0.6);
  std::uniform_int_distribution<int> frames(2, 6);
  int mismatches = 0;
  int polarity_errors = 0;
  int total_events = 0;
  for (int k = 0; k < 20; ++k) {
    SimulatorConfig cfg;
    cfg.contrast_std = 0.0;
    cfg.contrast_mean = contrast(rng);
    cfg.rng_seed = static_cast<std::uint64_t>(k);
    const int t = frames(rng);
    const int h = 3;
    const int w = 4;
    FrameSequence seq;
    for (int i = 0; i < t; ++i) seq.frames.push_back(Image::zeros(1, h, w));
    // Each pixel follows its own monotone log path, rising or falling.
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        const double sign = (x + y) % 2 == 0 ? 1.0 : -1.0;
        double l = base(rng) + (sign < 0 ? 3.0 : 0.0);
        for (int i = 0; i < t; ++i) {
          seq.frames[i](0, y, x) = static_cast<float>(std::exp(l) - cfg.log_eps);
          l += sign * step(rng);
        }
      }
    }
    const EventStream fwd = simulate_events(seq, cfg);
    FrameSequence reversed;
    reversed.frames.assign(seq.frames.rbegin(), seq.frames.rend());
    const EventStream bwd = simulate_events(reversed, cfg);
    total_events += static_cast<int>(fwd.size());

    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        std::vector<double> knots;
        for (const Image& f : seq.frames) knots.push_back(std::log(double(f(0, y, x)) + cfg.log_eps));
        const auto oracle = tst::crossing_oracle(knots, cfg.contrast_mean);
        int pos = 0;
        int neg = 0;
        int rpos = 0;
        int rneg = 0;
        for (const Event& e : fwd.events) {
          if (e.x == x && e.y == y) (e.p > 0 ? pos : neg) += 1;
        }
        for (const Event& e : bwd.events) {
          if (e.x == x && e.y == y) (e.p > 0 ? rpos : rneg) += 1;
        }
        if (pos != oracle.positive || neg != oracle.negative) ++mismatches;
        if (rpos != neg || rneg != pos) ++polarity_errors;
      }
    }
  }
  return {mismatches == 0 && polarity_errors == 0 && total_events > 0,
          std::to_string(total_events) + " events, " + std::to_string(mismatches) +
              " count mismatches, " + std::to_string(polarity_errors) + " reversal mismatches"};
}

// --- 4 -----------------------------------------------------------------------

Outcome zero_init_identity() {
  SynthOptions o;
  o.frames = 3;
  o.height = 128;
  o.width = 128;
  o.vx = 1;
  o.vy = 1;
  o.seed = 1004;
  const ClipRecord clip = synth_clip(o);
  EvTextureNet<float> net(NetworkConfig{}, 1004);
  const FrameSequence sr = net.infer(clip.lr_frames, clip.lr_voxels);
  double worst = 0.0;
  for (int t = 0; t < clip.length(); ++t) {
    const Image ref = upsample_bicubic(clip.lr_frames[t], 4);
    worst = std::max(worst, double((sr[t].matrix() - ref.matrix()).cwiseAbs().maxCoeff()));
  }
  return {worst <= kIdentityTol && sr.size() == 3 && sr[0].height() == 128,
          "max deviation from bicubic " + fmt(worst)};
}

// --- 5 -----------------------------------------------------------------------

Outcome ite_structure() {
  NetworkConfig cfg;
  EvTextureNet<double> net(cfg, 1005);
  tst::perturb_parameters(net.params(), 1005, 0.05);
  std::mt19937_64 rng(1005);
  const int c = cfg.channels;
  const auto f_prev = ad::constant(tst::random_tensor<double>(rng, c, 16, 16));
  const auto voxel = ad::constant(tst::random_tensor<double>(rng, cfg.bins, 16, 16));
  const auto frame = ad::constant(tst::random_tensor<double>(rng, 3, 16, 16, 0.0, 1.0));
  IteTrace<double> trace;
  const Tensor<double> out = net.ite_module(f_prev, voxel, frame, &trace).value();

  Tensor<double> total = Tensor<double>::zeros(c, 16, 16);
  for (const auto& d : trace.deltas) total.matrix() += d.matrix();
  Tensor<double> diff = out;
  diff.matrix() -= f_prev.value().matrix();
  const double telescope = tst::max_abs_diff(diff, total);

  const void* extractor = &net.ite(Direction::kForward).texture_extractor();
  bool shared = trace.texture_extractor_used.size() == trace.deltas.size() &&
                trace.updater_used.size() == trace.deltas.size();
  for (std::size_t i = 0; shared && i < trace.deltas.size(); ++i) {
    shared = trace.texture_extractor_used[i] == extractor &&
             trace.updater_used[i] == trace.updater_used[0];
  }
  // Sharing also shows in the parameter count, which does not grow with B.
  NetworkConfig eight = cfg;
  eight.bins = 8;
  EvTextureNet<double> wider(eight, 1005);
  const bool same_count = net.params().scalar_count() == wider.params().scalar_count();

  // The same holds inside a sequence pass.
  const auto frames = std::vector<Var<double>>{frame, frame};
  const auto seq = net.forward_sequence(frames, {voxel}, true);
  const bool seq_trace = seq.forward_traces.size() == 1 &&
                         seq.forward_traces[0].deltas.size() == static_cast<std::size_t>(cfg.bins);

  const bool pass = trace.deltas.size() == static_cast<std::size_t>(cfg.bins) &&
                    telescope <= kTelescopeTol && shared && seq_trace && same_count;
  return {pass, "trace length " + std::to_string(trace.deltas.size()) + " (B = " +
                    std::to_string(cfg.bins) + "), telescoping err " + fmt(telescope) +
                    ", shared extractor " + (shared && same_count ? "yes" : "no")};
}

// --- 6 -----------------------------------------------------------------------

Outcome gradient_check() {
  const auto start = Clock::now();
  NetworkConfig cfg;
  cfg.channels = 8;
  cfg.bins = 2;
  cfg.context_blocks = 0;
  cfg.updater_blocks = 0;
  cfg.fusion_blocks = 0;
  cfg.gru_layers = 1;
  cfg.flow_levels = 1;
  EvTextureNet<double> net(cfg, 1006);
  tst::perturb_parameters(net.params(), 1006, 0.05);
  std::mt19937_64 rng(1006);
  std::vector<Var<double>> frames;
  std::vector<Var<double>> targets;
  for (int t = 0; t < 2; ++t) {
    frames.push_back(ad::constant(tst::random_tensor<double>(rng, 3, 8, 8, 0.0, 1.0)));
    targets.push_back(ad::constant(tst::random_tensor<double>(rng, 3, 32, 32, 0.0, 1.0)));
  }
  const std::vector<Var<double>> voxels{ad::constant(tst::random_tensor<double>(rng, 2, 8, 8))};
  const double eps = 1e-3;

  const auto loss = [&]() {
    const auto out = net.forward_sequence(frames, voxels);
    Var<double> total = ad::charbonnier(out.frames[0], targets[0], eps);
    for (std::size_t t = 1; t < out.frames.size(); ++t) {
      total = ad::add(total, ad::charbonnier(out.frames[t], targets[t], eps));
    }
    return total;
  };

  auto& store = net.params();
  store.zero_grad();
  ad::backward(loss());

  const auto eval = [&]() {
    ad::NoGradGuard guard;
    return loss().value()(0, 0, 0);
  };

  const double base = eval();
  std::size_t checked = 0;
  std::size_t failed = 0;
  std::size_t kinks = 0;
  double worst = 0.0;
  std::string worst_name;
  for (const auto& name : store.names()) {
    Var<double>& p = store.at(name);
    const Tensor<double> g = p.grad();
    Tensor<double>& v = p.mutable_value();
    for (Eigen::Index i = 0; i < v.size(); ++i) {
      const double analytic = g.data()[i];
      if (std::abs(analytic) <= kGradFloor) continue;
      const double x0 = v.data()[i];
      const auto at = [&](double dx) {
        v.data()[i] = x0 + dx;
        return eval();
      };
      // Central differences over a few steps: large ones beat round-off on
      // tiny gradients, small ones step over nearby kinks (leaky-ReLU corners,
      // bilinear cell edges). At a kink the analytic value is the derivative
      // on the current side, so a one-sided match also counts.
      const auto rel_err = [&](double numeric) {
        return std::abs(analytic - numeric) / std::max(std::abs(analytic), std::abs(numeric));
      };
      double rel = 1.0;
      double side = 1.0;
      for (const double h : {1e-5, 1e-3, 1e-4, 1e-6}) {
        const double up = at(h);
        const double down = at(-h);
        rel = std::min(rel, rel_err((up - down) / (2 * h)));
        if (rel < kGradRelTol) break;
        side = std::min({side, rel_err((up - base) / h), rel_err((base - down) / h)});
      }
      const bool one_sided = rel >= kGradRelTol && side < kGradRelTol;
      if (one_sided) rel = side;
      v.data()[i] = x0;
      ++checked;
      if (rel >= kGradRelTol) ++failed;
      if (one_sided) ++kinks;
      if (rel > worst) {
        worst = rel;
        worst_name = name;
      }
    }
  }
  const double elapsed = seconds_since(start);
  return {failed == 0 && checked > 0 && elapsed < kGradSeconds,
          std::to_string(checked) + " of " + std::to_string(store.scalar_count()) +
              " parameters checked (" + std::to_string(kinks) + " one-sided at a kink), " +
              std::to_string(failed) + " over tolerance, worst rel err " +
              fmt(worst) + (worst_name.empty() ? "" : " (" + worst_name + ")") + ", " +
              fmt(elapsed, 3) + " s"};
}

// --- 7 -----------------------------------------------------------------------

std::vector<ClipRecord> corpus(int count, std::uint64_t seed, std::vector<PatternKind> kinds) {
  SynthOptions base;
  base.frames = 5;
  base.height = 96;
  base.width = 96;
  return synth_corpus(count, base, seed, kinds);
}

double mean_val_psnr(const EvTextureNet<float>& net, const std::vector<ClipRecord>& clips) {
  double total = 0.0;
  for (const ClipRecord& c : clips) total += validation_psnr(net, c);
  return total / static_cast<double>(clips.size());
}

double mean_bicubic_psnr(const std::vector<ClipRecord>& clips) {
  double total = 0.0;
  for (const ClipRecord& c : clips) total += bicubic_psnr(c);
  return total / static_cast<double>(clips.size());
}

Outcome training_efficacy(const fs::path& work) {
  const auto start = Clock::now();
  const auto train_set = corpus(8, 1007, {PatternKind::kCheckerboard, PatternKind::kPerlin});
  const auto held_out = corpus(6, 2007, {PatternKind::kCheckerboard, PatternKind::kPerlin});
  const auto checker = corpus(4, 3007, {PatternKind::kCheckerboard});

  TrainConfig schedule;
  schedule.total_iters = 2000;
  schedule.batch = 2;
  schedule.crop = 16;
  schedule.seq_len = 3;
  schedule.val_every = schedule.total_iters;
  schedule.checkpoint_every = 0;

  NetworkConfig base;
  base.channels = 8;

  // Seed-to-seed spread at this scale is a few tenths of a dB, so every
  // variant is trained under the same seeds and the PSNRs are averaged.
  const std::uint64_t seeds[] = {7, 8};
  struct Result {
    double held_out = 0.0;
    double checker = 0.0;
  };
  const auto run = [&](const std::string& variant) {
    Result r;
    for (const std::uint64_t seed : seeds) {
      EvTextureNet<float> net(ablation_variant(variant, base), seed);
      TrainConfig cfg = schedule;
      cfg.seed = seed;
      TrainOptions opts;
      opts.out_dir = work / "train" / (variant + "_" + std::to_string(seed));
      opts.log_progress = false;
      train(net, train_set, nullptr, cfg, opts);
      r.held_out += mean_val_psnr(net, held_out) / std::size(seeds);
      r.checker += mean_val_psnr(net, checker) / std::size(seeds);
    }
    return r;
  };

  const Result full = run("evtexture");
  const Result motion_only = run("model-a");
  const Result direct = run("model-d");
  const double bicubic = mean_bicubic_psnr(held_out);
  const double elapsed = seconds_since(start);

  const bool a = full.held_out >= bicubic + kTrainMarginDb;
  const bool b = full.checker >= motion_only.checker;
  const bool c = full.checker >= direct.checker;
  return {a && b && c && elapsed <= kTrainSeconds,
          "held-out full " + fmt(full.held_out, 5) + " dB vs bicubic " + fmt(bicubic, 5) +
              " dB; checkerboard full " + fmt(full.checker, 5) + " / model-a " +
              fmt(motion_only.checker, 5) + " / model-d " + fmt(direct.checker, 5) + " dB; " +
              fmt(elapsed, 4) + " s"};
}

// --- 8 -----------------------------------------------------------------------

double texture_scalar(const FrameSequence& frames, double alpha, int k, double sigma) {
  const int r = k / 2;
  std::vector<double> taps(static_cast<std::size_t>(k));
  double norm = 0.0;
  for (int i = 0; i < k; ++i) {
    taps[static_cast<std::size_t>(i)] = std::exp(-double((i - r) * (i - r)) / (2 * sigma * sigma));
    norm += taps[static_cast<std::size_t>(i)];
  }
  for (double& t : taps) t /= norm;
  const auto mirror = [](int i, int n) {
    while (i < 0 || i >= n) i = i < 0 ? -i : 2 * (n - 1) - i;
    return i;
  };
  double total = 0.0;
  for (const Image& f : frames.frames) {
    const int h = f.height();
    const int w = f.width();
    const auto luma = [&](int y, int x) {
      return 0.299 * f(0, y, x) + 0.587 * f(1, y, x) + 0.114 * f(2, y, x);
    };
    double sq = 0.0;
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        double blurred = 0.0;
        for (int dy = -r; dy <= r; ++dy) {
          for (int dx = -r; dx <= r; ++dx) {
            blurred += taps[static_cast<std::size_t>(dy + r)] * taps[static_cast<std::size_t>(dx + r)] *
                       luma(mirror(y + dy, h), mirror(x + dx, w));
          }
        }
        sq += (luma(y, x) - blurred) * (luma(y, x) - blurred);
      }
    }
    total += std::sqrt(sq / (h * w));
  }
  return std::min(1.0, alpha * total / static_cast<double>(frames.size()));
}

Outcome texture_magnitude_checks() {
  FrameSequence flat;
  for (int t = 0; t < 4; ++t) flat.frames.push_back(Image::constant(3, 24, 24, 0.61f));
  const double flat_score = texture_magnitude(flat).magnitude;

  std::mt19937_64 rng(1008);
  double worst = 0.0;
  for (int k = 0; k < 6; ++k) {
    FrameSequence seq;
    for (int t = 0; t < 3; ++t) {
      seq.frames.push_back(tst::random_tensor<float>(rng, 3, 14 + k, 19 - k, 0.45, 0.45 + 0.02 * k));
    }
    const double lib = texture_magnitude(seq).magnitude;
    worst = std::max(worst, std::abs(lib - texture_scalar(seq, 10.0, 5, 1.5)));
  }

  std::uniform_real_distribution<double> d(0.0, 1.0);
  int bad_partitions = 0;
  for (int n = 5; n <= 60; ++n) {
    std::vector<double> mags;
    for (int i = 0; i < n; ++i) mags.push_back(d(rng));
    int counts[3] = {0, 0, 0};
    for (const TextureLevel l : bucket_by_magnitude(mags)) ++counts[static_cast<int>(l)];
    if (std::abs(counts[0] - 0.5 * n) > 1.0 || std::abs(counts[1] - 0.3 * n) > 1.0 ||
        std::abs(counts[2] - 0.2 * n) > 1.0) {
      ++bad_partitions;
    }
  }
  return {flat_score == 0.0 && worst <= kTextureTol && bad_partitions == 0,
          "constant clip " + fmt(flat_score) + ", oracle err " + fmt(worst) + ", " +
              std::to_string(bad_partitions) + " bad partitions for n = 5..60"};
}

// --- 9 -----------------------------------------------------------------------

Outcome metric_checks() {
  std::mt19937_64 rng(1009);
  const Image gt = tst::random_tensor<float>(rng, 3, 48, 48, 0.1, 0.8);
  Image pred = gt;
  pred.matrix().array() += 0.1f;
  const double p = psnr(pred, gt, ChannelMode::kRGB);
  const double s = ssim(gt, gt, ChannelMode::kY);
  const double s_rgb = ssim(gt, gt, ChannelMode::kRGB);

  FrameSequence a;
  FrameSequence b;
  for (int t = 0; t < 3; ++t) {
    b.frames.push_back(tst::random_tensor<float>(rng, 3, 40, 40, 0.0, 1.0));
    Image q = b.frames.back();
    q.matrix().array() += 0.03f;
    a.frames.push_back(q);
  }
  std::string schema;
  for (const ChannelMode mode : {ChannelMode::kY, ChannelMode::kRGB}) {
    for (const int border : {0, 8}) {
      const TextureReport tex = texture_magnitude(b);
      const std::string err = validate_report_json(report_json("clip", evaluate_sequence(a, b, mode, border), &tex));
      if (!err.empty() && schema.empty()) schema = err;
    }
  }
  return {std::abs(p - 20.0) <= kPsnrTol && s == 1.0 && s_rgb == 1.0 && schema.empty(),
          "psnr " + fmt(p, 6) + " dB, ssim(x, x) " + fmt(s, 17) + ", schema " +
              (schema.empty() ? "valid" : schema)};
}

// --- 10 ----------------------------------------------------------------------

Outcome event_flow_toggle() {
  NetworkConfig cfg;
  cfg.channels = 8;
  EvTextureNet<double> plain(cfg, 1010);
  tst::perturb_parameters(plain.params(), 1010, 0.05);
  NetworkConfig plus_cfg = cfg;
  plus_cfg.use_event_flow = true;
  EvTextureNet<double> plus(plus_cfg, 1010);
  const std::size_t copied = plus.params().copy_matching(plain.params());

  std::mt19937_64 rng(1010);
  std::vector<Var<double>> frames;
  std::vector<Var<double>> voxels;
  for (int t = 0; t < 3; ++t) frames.push_back(ad::constant(tst::random_tensor<double>(rng, 3, 16, 16, 0.0, 1.0)));
  for (int t = 0; t < 2; ++t) voxels.push_back(ad::constant(tst::random_tensor<double>(rng, 5, 16, 16)));

  ad::NoGradGuard guard;
  const auto x = plain.forward_sequence(frames, voxels);
  const auto y = plus.forward_sequence(frames, voxels);
  double worst = 0.0;
  double moved = 0.0;
  for (std::size_t t = 0; t < x.frames.size(); ++t) {
    worst = std::max(worst, tst::max_abs_diff(x.frames[t].value(), y.frames[t].value()));
    moved = std::max(moved, tst::max_abs_diff(x.frames[t].value(),
                                              upsample_bicubic(frames[t].value(), 4)));
  }
  return {copied == plain.params().size() && worst <= kEventFlowTol && moved > 1e-4,
          "max output difference " + fmt(worst) + " (" + std::to_string(copied) +
              " shared tensors, outputs differ from bicubic by " + fmt(moved) + ")"};
}

// --- 11 ----------------------------------------------------------------------

Outcome reproducibility(const fs::path& work) {
  SynthOptions base;
  base.frames = 4;
  base.height = 64;
  base.width = 64;
  const auto clips = synth_corpus(3, base, 1011, {PatternKind::kCheckerboard, PatternKind::kPerlin});
  TrainConfig schedule;
  schedule.total_iters = 30;
  schedule.batch = 2;
  schedule.crop = 16;
  schedule.seq_len = 3;
  schedule.flow_freeze_iters = 10;
  schedule.val_every = 10;
  schedule.checkpoint_every = 0;
  schedule.seed = 11;
  NetworkConfig cfg;
  cfg.channels = 8;

  std::vector<std::string> csv;
  for (const char* tag : {"a", "b"}) {
    EvTextureNet<float> net(cfg, 11);
    TrainOptions opts;
    opts.out_dir = work / "repro" / tag;
    opts.log_progress = false;
    train(net, clips, &clips[0], schedule, opts);
    csv.push_back(read_text_file(*opts.out_dir / "metrics.csv"));
  }
  const auto lines = std::count(csv[0].begin(), csv[0].end(), '\n');
  return {csv[0] == csv[1] && lines > 30,
          std::string(csv[0] == csv[1] ? "identical" : "different") + " metrics.csv (" +
              std::to_string(lines) + " lines)"};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"evtexture acceptance run"};
  fs::path work = fs::temp_directory_path() / "evtexture_acceptance";
  std::vector<int> only;
  app.add_option("--work-dir", work, "scratch directory for training outputs");
  app.add_option("--only", only, "run just these criteria")->check(CLI::Range(1, 11));
  CLI11_PARSE(app, argc, argv);

  fs::remove_all(work);
  fs::create_directories(work);

  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"voxelization matches the per-event oracle", voxel_oracle_equivalence},
      {"normalized voxels stay in [-1, 1]", normalization_range},
      {"simulator crossing counts", crossing_counts},
      {"untrained model equals bicubic", zero_init_identity},
      {"iterative texture enhancement structure", ite_structure},
      {"analytic gradients match finite differences", gradient_check},
      {"training beats bicubic and the ablations", [&] { return training_efficacy(work); }},
      {"texture magnitude and bucketing", texture_magnitude_checks},
      {"psnr, ssim and report schema", metric_checks},
      {"event flow off at init leaves outputs unchanged", event_flow_toggle},
      {"seeded training is reproducible", [&] { return reproducibility(work); }},
  };

  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (!only.empty() && std::find(only.begin(), only.end(), id) == only.end()) continue;
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failures += o.pass ? 0 : 1;
    std::cout << (o.pass ? "PASS" : "FAIL") << "  " << id << ". " << criteria[i].first << ": "
              << o.detail << std::endl;
  }
  return failures == 0 ? 0 : 1;
}
