#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "evtexture/data.hpp"
#include "evtexture/network.hpp"

namespace evtexture {

struct TrainConfig {
  double lr_main = 2e-4;
  double lr_flow = 1e-4;
  int flow_freeze_iters = 200;
  int total_iters = 2000;
  int batch = 2;
  int crop = 32;  // LR patch side
  int seq_len = 5;
  double charbonnier_eps = 1e-3;
  std::uint64_t seed = 0;
  int val_every = 100;
  int checkpoint_every = 500;  // 0 disables periodic checkpoints

  static TrainConfig desk();
  /// Full-scale schedule: 300k iterations, batch 8, 64 px crops, 15 frames.
  static TrainConfig full_scale();
  void validate() const;
};

/// Mean of sqrt(d^2 + eps^2) over every element of every frame.
double charbonnier_loss(const FrameSequence& pred, const FrameSequence& gt, double eps);

/// One training example: an LR window, its HR ground truth and T-1 voxels.
struct Sample {
  FrameSequence lr;
  FrameSequence hr;
  std::vector<VoxelGrid> voxels;
};

Image flip_image(const Image& image, bool horizontal);
VoxelGrid flip_voxel(const VoxelGrid& grid, bool horizontal);

/// Same random horizontal and vertical flips applied to LR, HR and voxels.
void augment(Sample& sample, std::mt19937_64& rng);
/// Deterministic variant of augment.
void apply_flips(Sample& sample, bool horizontal, bool vertical);

/// Random temporal window of `seq_len` frames and a random `crop` x `crop`
/// LR patch (HR patch scaled accordingly).
Sample random_crop(const ClipRecord& clip, int seq_len, int crop, std::mt19937_64& rng);

/// Whole clip as a sample.
Sample full_clip(const ClipRecord& clip);

/// lr * (1 + cos(pi * iter / total)) / 2; zero from `total` on.
double cosine_lr(double base, int iter, int total);

/// Adam with beta = (0.9, 0.999), eps 1e-8 and per-parameter step counts.
/// Parameters that are skipped keep their moments and step count untouched.
class Adam {
 public:
  explicit Adam(double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8)
      : beta1_(beta1), beta2_(beta2), eps_(eps) {}

  /// Updates `param` from its accumulated gradient (no-op without one).
  void step(const std::string& name, ad::Var<float>& param, double lr);

 private:
  struct State {
    Eigen::ArrayXXf m, v;
    long steps = 0;
  };
  double beta1_, beta2_, eps_;
  std::map<std::string, State> state_;
};

struct LogRow {
  int iter = 0;
  std::optional<double> loss;
  double lr = 0.0;
  std::optional<double> val_psnr;
};

std::string format_log_csv(const std::vector<LogRow>& rows);

struct TrainResult {
  std::vector<LogRow> log;
  double bicubic_val_psnr = 0.0;
  double final_val_psnr = 0.0;
};

struct TrainOptions {
  /// When set, receives metrics.csv, periodic and final checkpoints, and a
  /// NaN dump directory if the loss blows up.
  std::optional<std::filesystem::path> out_dir;
  bool log_progress = true;
};

/// Validation PSNR (Y channel) of the model on a whole clip; outputs are
/// clipped to [0, 1] as on export.
double validation_psnr(const EvTextureNet<float>& net, const ClipRecord& clip);
double bicubic_psnr(const ClipRecord& clip);

/// Seeded, single-threaded training loop. Throws NumericalError on a
/// non-finite loss after dumping the offending batch.
TrainResult train(EvTextureNet<float>& net, const std::vector<ClipRecord>& clips,
                  const ClipRecord* validation, const TrainConfig& cfg,
                  const TrainOptions& opts = {});

}  // namespace evtexture
