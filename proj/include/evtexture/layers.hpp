#pragma once

#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "evtexture/autodiff.hpp"

namespace evtexture::nn {

using ad::Var;

/// Ordered registry of trainable tensors keyed by dotted hierarchical names
/// ("forward_ite.texture_extractor.down1.weight"). Modules keep Var handles
/// that share nodes with the registry.
template <typename T>
class ParameterStore {
 public:
  Var<T> add(const std::string& name, Tensor<T> init);

  const std::vector<std::string>& names() const { return order_; }
  const Var<T>& at(const std::string& name) const;
  Var<T>& at(const std::string& name);
  bool contains(const std::string& name) const { return params_.contains(name); }
  std::size_t size() const { return order_.size(); }
  std::size_t scalar_count() const;

  void zero_grad();
  /// Copies values for every name present in both stores with equal shapes.
  /// Returns the number copied.
  std::size_t copy_matching(const ParameterStore& other);

 private:
  std::map<std::string, Var<T>> params_;
  std::vector<std::string> order_;
};

enum class Init {
  kDefault,  // uniform(+-1/sqrt(fan_in)) weights and biases
  kZero,     // all zero
  kZeroBias  // default weights, zero bias
};

template <typename T>
class Conv2d {
 public:
  Conv2d() = default;
  Conv2d(ParameterStore<T>& store, const std::string& name, int in_channels, int out_channels,
         int kernel, int stride, std::mt19937_64& rng, Init init = Init::kDefault);

  Var<T> operator()(const Var<T>& x) const;

  int in_channels() const { return in_; }
  int out_channels() const { return out_; }
  const Var<T>& weight() const { return weight_; }
  const Var<T>& bias() const { return bias_; }

 private:
  Var<T> weight_;
  Var<T> bias_;
  int in_ = 0;
  int out_ = 0;
  int kernel_ = 3;
  int stride_ = 1;
};

/// x + conv(relu(conv(x))), no normalization.
template <typename T>
class ResidualBlock {
 public:
  ResidualBlock() = default;
  ResidualBlock(ParameterStore<T>& store, const std::string& name, int channels,
                std::mt19937_64& rng);
  Var<T> operator()(const Var<T>& x) const;

 private:
  Conv2d<T> conv1_;
  Conv2d<T> conv2_;
};

template <typename T>
Var<T> run_blocks(const std::vector<ResidualBlock<T>>& blocks, Var<T> x) {
  for (const auto& b : blocks) x = b(x);
  return x;
}

/// Five-stage encoder-decoder with skip connections: a full-resolution
/// stem, two stride-2 downsamplings (the second feeding a bottleneck conv),
/// and two bilinear 2x upsamplings that concatenate the matching encoder
/// output. Inputs whose sides are not multiples of 4 are reflect-padded and
/// the output cropped back.
template <typename T>
class UNet {
 public:
  UNet() = default;
  UNet(ParameterStore<T>& store, const std::string& name, int in_channels, int width,
       int out_channels, std::mt19937_64& rng, Init head_init);
  Var<T> operator()(const Var<T>& x) const;

  int in_channels() const { return enc1_.in_channels(); }

 private:
  Conv2d<T> enc1_, down1_, down2_, bottleneck_, up1_, up2_, head_;
};

}  // namespace evtexture::nn
