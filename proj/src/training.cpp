#include "evtexture/training.hpp"

#include <chrono>
#include <cmath>
#include <sstream>

#include <spdlog/spdlog.h>

#include "evtexture/checkpoint.hpp"
#include "evtexture/evaluation.hpp"
#include "evtexture/io.hpp"
#include "evtexture/resample.hpp"

namespace evtexture {

namespace fs = std::filesystem;

TrainConfig TrainConfig::desk() { return TrainConfig{}; }

TrainConfig TrainConfig::full_scale() {
  TrainConfig cfg;
  cfg.lr_main = 2e-4;
  cfg.lr_flow = 2.5e-5;
  cfg.flow_freeze_iters = 5000;
  cfg.total_iters = 300000;
  cfg.batch = 8;
  cfg.crop = 64;
  cfg.seq_len = 15;
  cfg.val_every = 5000;
  cfg.checkpoint_every = 5000;
  return cfg;
}

void TrainConfig::validate() const {
  if (!(lr_main > 0.0) || !(lr_flow > 0.0)) throw InvalidInput("train: learning rates must be > 0");
  if (flow_freeze_iters < 0) throw InvalidInput("train: flow_freeze_iters must be >= 0");
  if (total_iters < 0) throw InvalidInput("train: total_iters must be >= 0");
  if (batch < 1) throw InvalidInput("train: batch must be >= 1");
  if (crop < 4 || crop % 4 != 0) throw InvalidInput("train: crop must be a positive multiple of 4");
  if (seq_len < 2) throw InvalidInput("train: seq_len must be >= 2");
  if (!(charbonnier_eps >= 0.0)) throw InvalidInput("train: charbonnier_eps must be >= 0");
  if (val_every < 1) throw InvalidInput("train: val_every must be >= 1");
  if (checkpoint_every < 0) throw InvalidInput("train: checkpoint_every must be >= 0");
}

double charbonnier_loss(const FrameSequence& pred, const FrameSequence& gt, double eps) {
  if (pred.size() != gt.size()) throw InvalidInput("charbonnier_loss: sequence lengths differ");
  double total = 0.0;
  double count = 0.0;
  for (int t = 0; t < pred.size(); ++t) {
    require_same_shape(pred[t], gt[t], "charbonnier_loss");
    const auto d = (pred[t].matrix().cast<double>() - gt[t].matrix().cast<double>()).array();
    total += (d * d + eps * eps).sqrt().sum();
    count += static_cast<double>(d.size());
  }
  if (count == 0.0) throw InvalidInput("charbonnier_loss: empty input");
  return total / count;
}

namespace {

template <typename S>
Tensor<S> flip(const Tensor<S>& in, bool horizontal) {
  Tensor<S> out(in.channels(), in.height(), in.width());
  for (int c = 0; c < in.channels(); ++c) {
    if (horizontal) {
      out.plane(c) = in.plane(c).rowwise().reverse();
    } else {
      out.plane(c) = in.plane(c).colwise().reverse();
    }
  }
  return out;
}

template <typename S>
Tensor<S> crop_tensor(const Tensor<S>& in, int y, int x, int h, int w) {
  Tensor<S> out(in.channels(), h, w);
  for (int c = 0; c < in.channels(); ++c) out.plane(c) = in.plane(c).block(y, x, h, w);
  return out;
}

}  // namespace

Image flip_image(const Image& image, bool horizontal) { return flip(image, horizontal); }

VoxelGrid flip_voxel(const VoxelGrid& grid, bool horizontal) {
  VoxelGrid out = grid;
  out.bins = flip(grid.bins, horizontal);
  return out;
}

void apply_flips(Sample& sample, bool horizontal, bool vertical) {
  for (const bool h : {true, false}) {
    if (h ? !horizontal : !vertical) continue;
    for (Image& f : sample.lr.frames) f = flip_image(f, h);
    for (Image& f : sample.hr.frames) f = flip_image(f, h);
    for (VoxelGrid& v : sample.voxels) v = flip_voxel(v, h);
  }
}

void augment(Sample& sample, std::mt19937_64& rng) {
  std::bernoulli_distribution coin(0.5);
  const bool horizontal = coin(rng);
  const bool vertical = coin(rng);
  apply_flips(sample, horizontal, vertical);
}

Sample full_clip(const ClipRecord& clip) {
  return Sample{clip.lr_frames, clip.hr_frames, clip.lr_voxels};
}

Sample random_crop(const ClipRecord& clip, int seq_len, int crop, std::mt19937_64& rng) {
  const int t = clip.length();
  const int h = clip.lr_frames[0].height();
  const int w = clip.lr_frames[0].width();
  if (seq_len > t) {
    throw InvalidInput("clip " + clip.name + " has " + std::to_string(t) + " frames, need " +
                       std::to_string(seq_len));
  }
  if (crop > h || crop > w) {
    throw InvalidInput("clip " + clip.name + " is smaller than the " + std::to_string(crop) +
                       " px crop");
  }
  const int t0 = std::uniform_int_distribution<int>(0, t - seq_len)(rng);
  const int y = std::uniform_int_distribution<int>(0, h - crop)(rng);
  const int x = std::uniform_int_distribution<int>(0, w - crop)(rng);
  const int s = clip.scale;
  Sample out;
  out.lr.fps = clip.lr_frames.fps;
  out.hr.fps = clip.hr_frames.fps;
  for (int i = t0; i < t0 + seq_len; ++i) {
    out.lr.frames.push_back(crop_tensor(clip.lr_frames[i], y, x, crop, crop));
    out.hr.frames.push_back(crop_tensor(clip.hr_frames[i], y * s, x * s, crop * s, crop * s));
    if (i + 1 < t0 + seq_len) {
      const VoxelGrid& v = clip.lr_voxels[static_cast<std::size_t>(i)];
      VoxelGrid c = v;
      c.bins = crop_tensor(v.bins, y, x, crop, crop);
      out.voxels.push_back(std::move(c));
    }
  }
  return out;
}

double cosine_lr(double base, int iter, int total) {
  if (total <= 0 || iter >= total) return 0.0;
  return base * 0.5 * (1.0 + std::cos(M_PI * static_cast<double>(iter) / total));
}

void Adam::step(const std::string& name, ad::Var<float>& param, double lr) {
  const Tensor<float>& grad = param.node()->grad;
  if (grad.size() == 0) return;
  State& s = state_[name];
  const auto g = grad.matrix().array();
  if (s.steps == 0) {
    s.m = Eigen::ArrayXXf::Zero(g.rows(), g.cols());
    s.v = Eigen::ArrayXXf::Zero(g.rows(), g.cols());
  }
  ++s.steps;
  const auto b1 = static_cast<float>(beta1_);
  const auto b2 = static_cast<float>(beta2_);
  s.m = b1 * s.m + (1.0f - b1) * g;
  s.v = b2 * s.v + (1.0f - b2) * g * g;
  const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(s.steps));
  const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(s.steps));
  const auto step_size = static_cast<float>(lr / c1);
  const auto root_c2 = static_cast<float>(std::sqrt(c2));
  param.mutable_value().matrix().array() -=
      step_size * s.m / (s.v.sqrt() / root_c2 + static_cast<float>(eps_));
}

std::string format_log_csv(const std::vector<LogRow>& rows) {
  std::ostringstream ss;
  ss.precision(9);
  ss << "iter,loss,lr,val_psnr\n";
  for (const LogRow& r : rows) {
    ss << r.iter << ',';
    if (r.loss) ss << *r.loss;
    ss << ',' << r.lr << ',';
    if (r.val_psnr) ss << *r.val_psnr;
    ss << '\n';
  }
  return ss.str();
}

namespace {

FrameSequence clip01(FrameSequence seq) {
  for (Image& f : seq.frames) f.matrix() = f.matrix().cwiseMax(0.0f).cwiseMin(1.0f);
  return seq;
}

double mean_psnr(const FrameSequence& pred, const FrameSequence& gt) {
  return evaluate_sequence(clip01(pred), gt, ChannelMode::kY, 0).clip_mean.psnr;
}

void dump_batch(const fs::path& dir, const std::vector<Sample>& batch) {
  fs::create_directories(dir);
  for (std::size_t b = 0; b < batch.size(); ++b) {
    const Sample& s = batch[b];
    const std::string p = "item" + std::to_string(b);
    for (int t = 0; t < s.lr.size(); ++t) {
      const Image& f = s.lr[t];
      write_npy_f32(dir / (p + "_lr" + std::to_string(t) + ".npy"),
                    std::vector<float>(f.data(), f.data() + f.size()),
                    {static_cast<std::size_t>(f.channels()), static_cast<std::size_t>(f.height()),
                     static_cast<std::size_t>(f.width())});
    }
    for (std::size_t t = 0; t < s.voxels.size(); ++t) {
      write_voxel(dir / (p + "_voxel" + std::to_string(t) + ".npy"), s.voxels[t]);
    }
  }
}

}  // namespace

double validation_psnr(const EvTextureNet<float>& net, const ClipRecord& clip) {
  return mean_psnr(net.infer(clip.lr_frames, clip.lr_voxels), clip.hr_frames);
}

double bicubic_psnr(const ClipRecord& clip) {
  FrameSequence up;
  for (const Image& f : clip.lr_frames.frames) up.frames.push_back(upsample_bicubic(f, clip.scale));
  return mean_psnr(up, clip.hr_frames);
}

TrainResult train(EvTextureNet<float>& net, const std::vector<ClipRecord>& clips,
                  const ClipRecord* validation, const TrainConfig& cfg, const TrainOptions& opts) {
  cfg.validate();
  if (clips.empty()) throw InvalidInput("train: empty dataset");
  for (const ClipRecord& c : clips) {
    c.validate();
    if (c.scale != net.config().scale) throw InvalidInput("train: clip scale differs from model");
  }
  if (opts.out_dir) fs::create_directories(*opts.out_dir);

  TrainResult result;
  std::mt19937_64 rng(cfg.seed);
  std::uniform_int_distribution<std::size_t> pick(0, clips.size() - 1);
  Adam adam;
  auto& store = net.params();
  const float eps = static_cast<float>(cfg.charbonnier_eps);

  if (validation != nullptr) {
    result.bicubic_val_psnr = bicubic_psnr(*validation);
    result.final_val_psnr = validation_psnr(net, *validation);
    result.log.push_back({0, std::nullopt, cosine_lr(cfg.lr_main, 0, cfg.total_iters),
                          result.final_val_psnr});
  }

  const auto start = std::chrono::steady_clock::now();
  for (int iter = 1; iter <= cfg.total_iters; ++iter) {
    const int step = iter - 1;
    const double lr_main = cosine_lr(cfg.lr_main, step, cfg.total_iters);
    const double lr_flow =
        step < cfg.flow_freeze_iters ? 0.0 : cosine_lr(cfg.lr_flow, step, cfg.total_iters);

    std::vector<Sample> batch;
    for (int b = 0; b < cfg.batch; ++b) {
      Sample s = random_crop(clips[pick(rng)], cfg.seq_len, cfg.crop, rng);
      augment(s, rng);
      batch.push_back(std::move(s));
    }

    store.zero_grad();
    double loss = 0.0;
    for (const Sample& s : batch) {
      std::vector<ad::Var<float>> frames;
      std::vector<ad::Var<float>> voxels;
      for (const Image& f : s.lr.frames) frames.push_back(image_var<float>(f));
      for (const VoxelGrid& v : s.voxels) voxels.push_back(voxel_var<float>(v));
      const SequenceOutput<float> out = net.forward_sequence(frames, voxels);
      ad::Var<float> total;
      for (int t = 0; t < s.hr.size(); ++t) {
        const ad::Var<float> term = ad::charbonnier(
            out.frames[static_cast<std::size_t>(t)], ad::constant(s.hr[t]), eps);
        total = t == 0 ? term : ad::add(total, term);
      }
      total = ad::scale(total, 1.0f / static_cast<float>(s.hr.size() * cfg.batch));
      loss += total.value()(0, 0, 0);
      if (!std::isfinite(loss)) break;
      ad::backward(total);
    }

    if (!std::isfinite(loss)) {
      const fs::path dump = (opts.out_dir ? *opts.out_dir : fs::temp_directory_path()) /
                            ("nan_dump_iter" + std::to_string(iter));
      dump_batch(dump, batch);
      throw NumericalError("non-finite loss at iteration " + std::to_string(iter) +
                           "; batch written to " + dump.string());
    }

    for (const std::string& name : store.names()) {
      const bool flow = EvTextureNet<float>::is_flow_parameter(name);
      if (flow && step < cfg.flow_freeze_iters) continue;
      adam.step(name, store.at(name), flow ? lr_flow : lr_main);
    }

    LogRow row{iter, loss, lr_main, std::nullopt};
    if (validation != nullptr && (iter % cfg.val_every == 0 || iter == cfg.total_iters)) {
      result.final_val_psnr = validation_psnr(net, *validation);
      row.val_psnr = result.final_val_psnr;
    }
    result.log.push_back(row);

    if (opts.log_progress && (iter % cfg.val_every == 0 || iter == cfg.total_iters)) {
      const double elapsed =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      spdlog::info("iter {}/{} loss {:.5f} lr {:.2e}{} ({:.0f}s)", iter, cfg.total_iters, loss,
                   lr_main, row.val_psnr ? fmt::format(" val {:.3f} dB", *row.val_psnr) : "",
                   elapsed);
    }
    if (opts.out_dir && cfg.checkpoint_every > 0 && iter % cfg.checkpoint_every == 0) {
      char name[32];
      std::snprintf(name, sizeof(name), "ckpt_%06d.ckpt", iter);
      save_checkpoint(*opts.out_dir / name, net, {{"iter", iter}, {"seed", cfg.seed}});
    }
  }

  if (opts.out_dir) {
    save_checkpoint(*opts.out_dir / "model.ckpt", net,
                    {{"iter", cfg.total_iters}, {"seed", cfg.seed}});
    write_text_file(*opts.out_dir / "metrics.csv", format_log_csv(result.log));
  }
  return result;
}

}  // namespace evtexture
