#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "evtexture/events.hpp"
#include "evtexture/layers.hpp"

namespace evtexture {

enum class UpdaterKind { kConvGru, kConv };

struct NetworkConfig {
  int channels = 16;
  int scale = 4;
  int bins = 5;  // also the ITE iteration count
  int context_blocks = 2;
  int updater_blocks = 2;
  int fusion_blocks = 2;
  int gru_layers = 3;
  bool use_event_flow = false;
  int flow_levels = 3;

  // Ablation axes.
  UpdaterKind updater = UpdaterKind::kConvGru;
  bool iterative = true;         // false: one UNet over the whole voxel grid
  bool residual = true;          // false: f_i = delta_i instead of f_{i-1} + delta_i
  bool use_motion_branch = true;
  bool use_texture_branch = true;
  bool bidirectional = true;     // false: forward propagation only, no f^B

  /// Full-size widths (8 context blocks, 5 updater blocks, 64 channels).
  static NetworkConfig full_scale();
  void validate() const;
};

std::string to_string(UpdaterKind kind);
UpdaterKind updater_from_string(const std::string& name);

/// Propagation direction. Backward propagation reads each interval's voxel
/// grid in reverse bin order with negated polarity, and uses flow toward the
/// later frame.
enum class Direction { kForward, kBackward };

template <typename T>
struct IteStepResult {
  ad::Var<T> hidden;
  ad::Var<T> feature;
  ad::Var<T> delta;
  std::vector<Tensor<T>> update_gates;  // z per GRU layer (empty for conv updater)
  std::vector<Tensor<T>> reset_gates;   // r per GRU layer
};

template <typename T>
struct IteTrace {
  std::vector<Tensor<T>> deltas;
  std::vector<const void*> texture_extractor_used;
  std::vector<const void*> updater_used;
};

template <typename T>
class EvTextureNet;

/// Per-direction texture branch: context extractor, voxel-bin texture
/// extractor, and the gated updater with its residual delta head.
template <typename T>
class IteModule {
 public:
  IteModule(nn::ParameterStore<T>& store, const std::string& name, const NetworkConfig& cfg,
            std::mt19937_64& rng);

  ad::Var<T> extract_context(const ad::Var<T>& frame) const;
  ad::Var<T> extract_texture(const ad::Var<T>& voxel_bins) const;
  IteStepResult<T> step(const ad::Var<T>& hidden, const ad::Var<T>& feature,
                        const ad::Var<T>& context, const ad::Var<T>& texture) const;
  /// f_prev refined once per voxel bin (or once over the whole grid when not
  /// iterative). `voxel` is B x H x W, already in the order to consume.
  ad::Var<T> operator()(const ad::Var<T>& f_prev, const ad::Var<T>& voxel,
                        const ad::Var<T>& frame, IteTrace<T>* trace = nullptr) const;

  const nn::UNet<T>& texture_extractor() const { return texture_; }

 private:
  struct GruCell {
    nn::Conv2d<T> z, r, q;
  };

  NetworkConfig cfg_;
  nn::Conv2d<T> context_stem_;
  std::vector<nn::ResidualBlock<T>> context_blocks_;
  nn::UNet<T> texture_;
  std::vector<GruCell> gru_;
  std::vector<nn::Conv2d<T>> conv_updater_;
  std::vector<nn::ResidualBlock<T>> delta_blocks_;
  nn::Conv2d<T> delta_head_;
};

/// Coarse-to-fine flow estimator. Each pyramid level warps the previous
/// frame by the upsampled coarser flow and predicts a residual correction.
template <typename T>
class FlowNet {
 public:
  FlowNet(nn::ParameterStore<T>& store, const std::string& name, int width, int levels,
          std::mt19937_64& rng);
  /// Flow from frame_t toward frame_ref: warp(frame_ref, flow) ~ frame_t.
  ad::Var<T> operator()(const ad::Var<T>& frame_t, const ad::Var<T>& frame_ref) const;
  int levels() const { return static_cast<int>(levels_.size()); }

 private:
  struct Level {
    nn::Conv2d<T> conv1, conv2, head;
  };
  std::vector<Level> levels_;
};

/// Lifted frame, optional backward feature, motion and texture features
/// concatenated, squeezed and refined by residual blocks.
template <typename T>
class Fusion {
 public:
  Fusion(nn::ParameterStore<T>& store, const std::string& name, int channels, int inputs,
         int blocks, std::mt19937_64& rng);
  ad::Var<T> operator()(const ad::Var<T>& frame, const std::vector<ad::Var<T>>& features) const;

 private:
  nn::Conv2d<T> lift_;
  nn::Conv2d<T> squeeze_;
  std::vector<nn::ResidualBlock<T>> blocks_;
  int inputs_;
};

/// Pixel-shuffle reconstruction added to the bicubic-upsampled frame.
template <typename T>
class Upsampler {
 public:
  Upsampler(nn::ParameterStore<T>& store, const std::string& name, int channels, int scale,
            std::mt19937_64& rng);
  ad::Var<T> operator()(const ad::Var<T>& feature, const ad::Var<T>& frame) const;

 private:
  std::vector<nn::Conv2d<T>> expand_;
  nn::Conv2d<T> head_;
  int scale_;
};

/// Result of a sequence pass with optional introspection.
template <typename T>
struct SequenceOutput {
  std::vector<ad::Var<T>> frames;
  std::vector<IteTrace<T>> forward_traces;  // one per timestamp with a predecessor
  std::vector<ad::Var<T>> forward_features;
};

template <typename T>
class EvTextureNet {
 public:
  EvTextureNet(const NetworkConfig& cfg, std::uint64_t seed);
  EvTextureNet(const EvTextureNet&) = delete;
  EvTextureNet& operator=(const EvTextureNet&) = delete;

  const NetworkConfig& config() const { return cfg_; }
  nn::ParameterStore<T>& params() { return store_; }
  const nn::ParameterStore<T>& params() const { return store_; }

  /// Parameters updated at the flow learning rate.
  static bool is_flow_parameter(const std::string& name);

  ad::Var<T> estimate_flow(const ad::Var<T>& frame_t, const ad::Var<T>& frame_prev) const;
  ad::Var<T> warp(const ad::Var<T>& feature, const ad::Var<T>& flow) const;
  ad::Var<T> extract_context(const ad::Var<T>& frame, Direction dir = Direction::kForward) const;
  ad::Var<T> extract_texture(const ad::Var<T>& voxel_bin,
                             Direction dir = Direction::kForward) const;
  IteStepResult<T> ite_step(const ad::Var<T>& hidden, const ad::Var<T>& f_prev_iter,
                            const ad::Var<T>& context, const ad::Var<T>& texture,
                            Direction dir = Direction::kForward) const;
  ad::Var<T> ite_module(const ad::Var<T>& f_prev, const ad::Var<T>& voxel,
                        const ad::Var<T>& frame_t, IteTrace<T>* trace = nullptr,
                        Direction dir = Direction::kForward) const;
  /// EvTexture+ only; throws UnsupportedOperation otherwise.
  ad::Var<T> event_flow(const ad::Var<T>& voxel) const;
  ad::Var<T> fuse_and_propagate(const ad::Var<T>& frame_t, const std::vector<ad::Var<T>>& features,
                                Direction dir = Direction::kForward) const;
  ad::Var<T> upsample(const ad::Var<T>& feature, const ad::Var<T>& frame_t) const;

  /// T frames (3 x H x W) and T-1 normalized interval voxels (B x H x W),
  /// voxels[t] spanning frames t -> t+1. Returns T frames at scale x.
  SequenceOutput<T> forward_sequence(const std::vector<ad::Var<T>>& frames,
                                     const std::vector<ad::Var<T>>& voxels,
                                     bool keep_traces = false) const;

  /// Convenience wrapper over plain data, no graph recorded.
  FrameSequence infer(const FrameSequence& lr, const std::vector<VoxelGrid>& voxels) const;

  const IteModule<T>& ite(Direction dir) const;

 private:
  /// Motion-branch feature: warp by RGB flow, and with event flow fused in
  /// by a 1x1 conv when enabled.
  ad::Var<T> motion_feature(const ad::Var<T>& f_prev, const ad::Var<T>& frame_t,
                            const ad::Var<T>& frame_prev, const ad::Var<T>& voxel) const;
  ad::Var<T> oriented_voxel(const ad::Var<T>& voxel, Direction dir) const;

  NetworkConfig cfg_;
  nn::ParameterStore<T> store_;
  std::unique_ptr<FlowNet<T>> flow_net_;
  std::unique_ptr<nn::UNet<T>> event_flow_net_;
  std::unique_ptr<nn::Conv2d<T>> motion_fuse_;
  std::unique_ptr<IteModule<T>> forward_ite_;
  std::unique_ptr<IteModule<T>> backward_ite_;
  std::unique_ptr<Fusion<T>> forward_fusion_;
  std::unique_ptr<Fusion<T>> backward_fusion_;
  std::unique_ptr<Upsampler<T>> upsampler_;
};

/// Converts a voxel grid to a constant Var.
template <typename T>
ad::Var<T> voxel_var(const VoxelGrid& grid) {
  return ad::constant(grid.bins.template cast<T>());
}

template <typename T>
ad::Var<T> image_var(const Image& image) {
  return ad::constant(image.template cast<T>());
}

/// Pixel-shuffle on plain tensors.
template <typename T>
Tensor<T> pixel_shuffle(const Tensor<T>& x, int r) {
  ad::NoGradGuard guard;
  return ad::pixel_shuffle(ad::constant(x), r).value();
}

}  // namespace evtexture
