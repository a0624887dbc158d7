#include "evtexture/network.hpp"

#include <algorithm>

#include "evtexture/resample.hpp"

namespace evtexture {

using ad::Var;

NetworkConfig NetworkConfig::full_scale() {
  NetworkConfig cfg;
  cfg.channels = 64;
  cfg.context_blocks = 8;
  cfg.updater_blocks = 5;
  cfg.fusion_blocks = 5;
  return cfg;
}

void NetworkConfig::validate() const {
  if (scale != 2 && scale != 4) throw InvalidInput("NetworkConfig: scale must be 2 or 4");
  if (bins < 1) throw InvalidInput("NetworkConfig: bins must be >= 1");
  if (channels < 4 || channels % 2 != 0) {
    throw InvalidInput("NetworkConfig: channels must be even and >= 4");
  }
  if (context_blocks < 0 || updater_blocks < 0 || fusion_blocks < 0) {
    throw InvalidInput("NetworkConfig: block counts must be >= 0");
  }
  if (gru_layers < 1) throw InvalidInput("NetworkConfig: gru_layers must be >= 1");
  if (flow_levels < 1) throw InvalidInput("NetworkConfig: flow_levels must be >= 1");
  if (!use_motion_branch && !use_texture_branch) {
    throw InvalidInput("NetworkConfig: at least one of the motion and texture branches is needed");
  }
  if (use_event_flow && !use_motion_branch) {
    throw InvalidInput("NetworkConfig: event flow feeds the motion branch, which is disabled");
  }
}

std::string to_string(UpdaterKind kind) { return kind == UpdaterKind::kConvGru ? "convgru" : "conv"; }

UpdaterKind updater_from_string(const std::string& name) {
  if (name == "convgru") return UpdaterKind::kConvGru;
  if (name == "conv") return UpdaterKind::kConv;
  throw InvalidInput("unknown updater '" + name + "' (expected convgru or conv)");
}

namespace {

// FNV-1a, so every module group draws from its own reproducible stream and
// optional modules do not shift the initialization of the others.
std::mt19937_64 group_rng(std::uint64_t seed, const std::string& group) {
  std::uint64_t h = 1469598103934665603ull;
  for (const char c : group) {
    h ^= static_cast<unsigned char>(c);
    h *= 1099511628211ull;
  }
  return std::mt19937_64(seed ^ h);
}

template <typename T>
Var<T> zeros_var(int c, int h, int w) {
  return ad::constant(Tensor<T>::zeros(c, h, w));
}

}  // namespace

// ---------------------------------------------------------------- IteModule

template <typename T>
IteModule<T>::IteModule(nn::ParameterStore<T>& store, const std::string& name,
                        const NetworkConfig& cfg, std::mt19937_64& rng)
    : cfg_(cfg) {
  const int c = cfg.channels;
  context_stem_ = nn::Conv2d<T>(store, name + ".context.stem", 3, c, 3, 1, rng);
  for (int i = 0; i < cfg.context_blocks; ++i) {
    context_blocks_.emplace_back(store, name + ".context.block" + std::to_string(i), c, rng);
  }
  const int texture_in = cfg.iterative ? 1 : cfg.bins;
  texture_ = nn::UNet<T>(store, name + ".texture_extractor", texture_in, c, c, rng,
                         nn::Init::kZeroBias);
  for (int l = 0; l < cfg.gru_layers; ++l) {
    const std::string prefix = name + ".updater.";
    if (cfg.updater == UpdaterKind::kConvGru) {
      const std::string cell = prefix + "gru" + std::to_string(l);
      gru_.push_back({nn::Conv2d<T>(store, cell + ".z", 3 * c, c, 3, 1, rng),
                      nn::Conv2d<T>(store, cell + ".r", 3 * c, c, 3, 1, rng),
                      nn::Conv2d<T>(store, cell + ".q", 3 * c, c, 3, 1, rng)});
    } else {
      conv_updater_.emplace_back(store, prefix + "conv" + std::to_string(l), 3 * c, c, 3, 1, rng);
    }
  }
  for (int i = 0; i < cfg.updater_blocks; ++i) {
    delta_blocks_.emplace_back(store, name + ".updater.block" + std::to_string(i), c, rng);
  }
  delta_head_ = nn::Conv2d<T>(store, name + ".updater.delta_head", c, c, 3, 1, rng, nn::Init::kZero);
}

template <typename T>
Var<T> IteModule<T>::extract_context(const Var<T>& frame) const {
  if (frame.channels() != 3) throw InvalidInput("extract_context: expected a 3-channel frame");
  return nn::run_blocks(context_blocks_, ad::leaky_relu(context_stem_(frame), T(0.1)));
}

template <typename T>
Var<T> IteModule<T>::extract_texture(const Var<T>& voxel_bins) const {
  return texture_(voxel_bins);
}

template <typename T>
IteStepResult<T> IteModule<T>::step(const Var<T>& hidden, const Var<T>& feature,
                                    const Var<T>& context, const Var<T>& texture) const {
  require_same_shape(hidden.value(), feature.value(), "ite_step");
  require_same_shape(hidden.value(), context.value(), "ite_step");
  require_same_shape(hidden.value(), texture.value(), "ite_step");
  if (hidden.channels() != cfg_.channels) throw InvalidInput("ite_step: channel mismatch");

  IteStepResult<T> out;
  const Var<T> x = ad::concat<T>({context, texture});
  Var<T> h = hidden;
  if (cfg_.updater == UpdaterKind::kConvGru) {
    for (const GruCell& cell : gru_) {
      const Var<T> hx = ad::concat<T>({h, x});
      const Var<T> z = ad::sigmoid(cell.z(hx));
      const Var<T> r = ad::sigmoid(cell.r(hx));
      const Var<T> q = ad::tanh(cell.q(ad::concat<T>({ad::mul(r, h), x})));
      h = ad::add(h, ad::mul(z, ad::sub(q, h)));  // (1 - z) h + z q
      out.update_gates.push_back(z.value());
      out.reset_gates.push_back(r.value());
    }
  } else {
    for (const nn::Conv2d<T>& conv : conv_updater_) {
      h = ad::leaky_relu(conv(ad::concat<T>({h, x})), T(0.1));
    }
  }
  out.hidden = h;
  out.delta = delta_head_(nn::run_blocks(delta_blocks_, h));
  out.feature = cfg_.residual ? ad::add(feature, out.delta) : out.delta;
  return out;
}

template <typename T>
Var<T> IteModule<T>::operator()(const Var<T>& f_prev, const Var<T>& voxel, const Var<T>& frame,
                                IteTrace<T>* trace) const {
  if (voxel.channels() != cfg_.bins) {
    throw InvalidInput("ite_module: voxel has " + std::to_string(voxel.channels()) +
                       " bins, model expects " + std::to_string(cfg_.bins));
  }
  if (voxel.height() != f_prev.height() || voxel.width() != f_prev.width()) {
    throw InvalidInput("ite_module: voxel and feature spatial sizes differ");
  }
  const Var<T> context = extract_context(frame);
  Var<T> hidden = f_prev;
  Var<T> feature = f_prev;
  const auto run = [&](const Var<T>& bins) {
    const Var<T> texture = texture_(bins);
    IteStepResult<T> r = step(hidden, feature, context, texture);
    hidden = r.hidden;
    feature = r.feature;
    if (trace != nullptr) {
      trace->deltas.push_back(r.delta.value());
      trace->texture_extractor_used.push_back(&texture_);
      trace->updater_used.push_back(&delta_head_);
    }
  };
  if (cfg_.iterative) {
    for (int i = 0; i < cfg_.bins; ++i) run(ad::slice_channels(voxel, i, 1));
  } else {
    run(voxel);
  }
  return feature;
}

// ------------------------------------------------------------------ FlowNet

template <typename T>
FlowNet<T>::FlowNet(nn::ParameterStore<T>& store, const std::string& name, int width, int levels,
                    std::mt19937_64& rng) {
  for (int l = 0; l < levels; ++l) {
    const std::string p = name + ".level" + std::to_string(l);
    levels_.push_back({nn::Conv2d<T>(store, p + ".conv1", 8, width, 3, 1, rng),
                       nn::Conv2d<T>(store, p + ".conv2", width, width, 3, 1, rng),
                       nn::Conv2d<T>(store, p + ".head", width, 2, 3, 1, rng, nn::Init::kZero)});
  }
}

template <typename T>
Var<T> FlowNet<T>::operator()(const Var<T>& frame_t, const Var<T>& frame_ref) const {
  require_same_shape(frame_t.value(), frame_ref.value(), "estimate_flow");
  const int levels = this->levels();
  const int div = 1 << (levels - 1);
  if (frame_t.height() % div != 0 || frame_t.width() % div != 0) {
    throw InvalidInput("estimate_flow: frame " + frame_t.value().shape_string() +
                       " not divisible by " + std::to_string(div));
  }
  std::vector<Var<T>> cur{frame_t};
  std::vector<Var<T>> ref{frame_ref};
  for (int l = 1; l < levels; ++l) {
    const Eigen::MatrixXd py = ad::average_pool_matrix(cur.back().height());
    const Eigen::MatrixXd px = ad::average_pool_matrix(cur.back().width());
    cur.push_back(ad::resample(cur.back(), py, px));
    ref.push_back(ad::resample(ref.back(), py, px));
  }
  Var<T> flow = zeros_var<T>(2, cur.back().height(), cur.back().width());
  for (int l = levels - 1; l >= 0; --l) {
    if (l < levels - 1) {
      flow = ad::scale(ad::resample(flow, ad::bilinear_upsample_matrix(flow.height()),
                                    ad::bilinear_upsample_matrix(flow.width())),
                       T(2));
    }
    const Var<T> warped = ad::warp(ref[static_cast<std::size_t>(l)], flow);
    const Level& level = levels_[static_cast<std::size_t>(l)];
    Var<T> x = ad::concat<T>({cur[static_cast<std::size_t>(l)], warped, flow});
    x = ad::leaky_relu(level.conv1(x), T(0.1));
    x = ad::leaky_relu(level.conv2(x), T(0.1));
    flow = ad::add(flow, level.head(x));
  }
  return flow;
}

// ------------------------------------------------------------------- Fusion

template <typename T>
Fusion<T>::Fusion(nn::ParameterStore<T>& store, const std::string& name, int channels, int inputs,
                  int blocks, std::mt19937_64& rng)
    : lift_(store, name + ".lift", 3, channels, 3, 1, rng),
      squeeze_(store, name + ".squeeze", (inputs + 1) * channels, channels, 3, 1, rng),
      inputs_(inputs) {
  for (int i = 0; i < blocks; ++i) {
    blocks_.emplace_back(store, name + ".block" + std::to_string(i), channels, rng);
  }
}

template <typename T>
Var<T> Fusion<T>::operator()(const Var<T>& frame, const std::vector<Var<T>>& features) const {
  if (static_cast<int>(features.size()) != inputs_) {
    throw InvalidInput("fuse_and_propagate: expected " + std::to_string(inputs_) +
                       " feature inputs, got " + std::to_string(features.size()));
  }
  std::vector<Var<T>> parts{ad::leaky_relu(lift_(frame), T(0.1))};
  for (const Var<T>& f : features) {
    if (f.height() != frame.height() || f.width() != frame.width()) {
      throw InvalidInput("fuse_and_propagate: feature/frame spatial mismatch");
    }
    parts.push_back(f);
  }
  const Var<T> x = ad::leaky_relu(squeeze_(ad::concat(parts)), T(0.1));
  return nn::run_blocks(blocks_, x);
}

// ---------------------------------------------------------------- Upsampler

template <typename T>
Upsampler<T>::Upsampler(nn::ParameterStore<T>& store, const std::string& name, int channels,
                        int scale, std::mt19937_64& rng)
    : scale_(scale) {
  for (int s = 1, i = 0; s < scale; s *= 2, ++i) {
    expand_.emplace_back(store, name + ".expand" + std::to_string(i), channels, 4 * channels, 3, 1,
                         rng);
  }
  head_ = nn::Conv2d<T>(store, name + ".head", channels, 3, 3, 1, rng, nn::Init::kZero);
}

template <typename T>
Var<T> Upsampler<T>::operator()(const Var<T>& feature, const Var<T>& frame) const {
  if (frame.channels() != 3) throw InvalidInput("upsample: expected a 3-channel frame");
  Var<T> x = feature;
  for (const auto& conv : expand_) x = ad::leaky_relu(ad::pixel_shuffle(conv(x), 2), T(0.1));
  const Var<T> base =
      ad::resample(frame, bicubic_matrix(frame.height(), frame.height() * scale_),
                   bicubic_matrix(frame.width(), frame.width() * scale_));
  return ad::add(head_(x), base);
}

// ------------------------------------------------------------ EvTextureNet

template <typename T>
EvTextureNet<T>::EvTextureNet(const NetworkConfig& cfg, std::uint64_t seed) : cfg_(cfg) {
  cfg_.validate();
  const int c = cfg_.channels;
  if (cfg_.use_motion_branch) {
    auto rng = group_rng(seed, "flow_net");
    flow_net_ = std::make_unique<FlowNet<T>>(store_, "flow_net", 16, cfg_.flow_levels, rng);
  }
  if (cfg_.use_event_flow) {
    auto rng = group_rng(seed, "event_flow");
    event_flow_net_ = std::make_unique<nn::UNet<T>>(store_, "event_flow_net", cfg_.bins, c, 2, rng,
                                                    nn::Init::kZero);
    motion_fuse_ = std::make_unique<nn::Conv2d<T>>(store_, "motion_fuse", 2 * c, c, 1, 1, rng,
                                                   nn::Init::kZero);
    // Starts as a pass-through of the RGB-flow feature (second input half).
    Tensor<T>& w = store_.at("motion_fuse.weight").mutable_value();
    for (int o = 0; o < c; ++o) w(o, 0, c + o) = T(1);
  }
  const int branch_inputs = (cfg_.use_motion_branch ? 1 : 0) + (cfg_.use_texture_branch ? 1 : 0);
  if (cfg_.use_texture_branch) {
    auto rng = group_rng(seed, "forward_ite");
    forward_ite_ = std::make_unique<IteModule<T>>(store_, "forward_ite", cfg_, rng);
  }
  {
    auto rng = group_rng(seed, "forward_fusion");
    forward_fusion_ = std::make_unique<Fusion<T>>(store_, "forward_fusion", c,
                                                  branch_inputs + (cfg_.bidirectional ? 1 : 0),
                                                  cfg_.fusion_blocks, rng);
  }
  if (cfg_.bidirectional) {
    if (cfg_.use_texture_branch) {
      auto rng = group_rng(seed, "backward_ite");
      backward_ite_ = std::make_unique<IteModule<T>>(store_, "backward_ite", cfg_, rng);
    }
    auto rng = group_rng(seed, "backward_fusion");
    backward_fusion_ = std::make_unique<Fusion<T>>(store_, "backward_fusion", c, branch_inputs,
                                                   cfg_.fusion_blocks, rng);
  }
  auto rng = group_rng(seed, "upsampler");
  upsampler_ = std::make_unique<Upsampler<T>>(store_, "upsampler", c, cfg_.scale, rng);
}

template <typename T>
bool EvTextureNet<T>::is_flow_parameter(const std::string& name) {
  return name.rfind("flow_net.", 0) == 0;
}

template <typename T>
const IteModule<T>& EvTextureNet<T>::ite(Direction dir) const {
  const auto& m = dir == Direction::kForward ? forward_ite_ : backward_ite_;
  if (!m) throw UnsupportedOperation("texture branch for this direction is not part of the model");
  return *m;
}

template <typename T>
Var<T> EvTextureNet<T>::estimate_flow(const Var<T>& frame_t, const Var<T>& frame_prev) const {
  if (!flow_net_) throw UnsupportedOperation("estimate_flow: motion branch disabled");
  return (*flow_net_)(frame_t, frame_prev);
}

template <typename T>
Var<T> EvTextureNet<T>::warp(const Var<T>& feature, const Var<T>& flow) const {
  return ad::warp(feature, flow);
}

template <typename T>
Var<T> EvTextureNet<T>::extract_context(const Var<T>& frame, Direction dir) const {
  return ite(dir).extract_context(frame);
}

template <typename T>
Var<T> EvTextureNet<T>::extract_texture(const Var<T>& voxel_bin, Direction dir) const {
  return ite(dir).extract_texture(voxel_bin);
}

template <typename T>
IteStepResult<T> EvTextureNet<T>::ite_step(const Var<T>& hidden, const Var<T>& f_prev_iter,
                                           const Var<T>& context, const Var<T>& texture,
                                           Direction dir) const {
  return ite(dir).step(hidden, f_prev_iter, context, texture);
}

template <typename T>
Var<T> EvTextureNet<T>::ite_module(const Var<T>& f_prev, const Var<T>& voxel,
                                   const Var<T>& frame_t, IteTrace<T>* trace,
                                   Direction dir) const {
  return ite(dir)(f_prev, voxel, frame_t, trace);
}

template <typename T>
Var<T> EvTextureNet<T>::event_flow(const Var<T>& voxel) const {
  if (!event_flow_net_) throw UnsupportedOperation("event_flow: use_event_flow is off");
  if (voxel.channels() != cfg_.bins) throw InvalidInput("event_flow: bin count mismatch");
  return (*event_flow_net_)(voxel);
}

template <typename T>
Var<T> EvTextureNet<T>::fuse_and_propagate(const Var<T>& frame_t,
                                           const std::vector<Var<T>>& features,
                                           Direction dir) const {
  const auto& fusion = dir == Direction::kForward ? forward_fusion_ : backward_fusion_;
  if (!fusion) throw UnsupportedOperation("fuse_and_propagate: direction not part of the model");
  for (const Var<T>& f : features) {
    if (f.channels() != cfg_.channels) throw InvalidInput("fuse_and_propagate: channel mismatch");
  }
  return (*fusion)(frame_t, features);
}

template <typename T>
Var<T> EvTextureNet<T>::upsample(const Var<T>& feature, const Var<T>& frame_t) const {
  if (feature.height() != frame_t.height() || feature.width() != frame_t.width()) {
    throw InvalidInput("upsample: feature/frame spatial mismatch");
  }
  return (*upsampler_)(feature, frame_t);
}

template <typename T>
Var<T> EvTextureNet<T>::oriented_voxel(const Var<T>& voxel, Direction dir) const {
  return dir == Direction::kForward ? voxel : ad::reverse_channels(voxel, T(-1));
}

template <typename T>
Var<T> EvTextureNet<T>::motion_feature(const Var<T>& f_prev, const Var<T>& frame_t,
                                       const Var<T>& frame_prev, const Var<T>& voxel) const {
  const Var<T> rgb = ad::warp(f_prev, estimate_flow(frame_t, frame_prev));
  if (!cfg_.use_event_flow) return rgb;
  const Var<T> ev = ad::warp(f_prev, event_flow(voxel));
  return (*motion_fuse_)(ad::concat<T>({ev, rgb}));
}

template <typename T>
SequenceOutput<T> EvTextureNet<T>::forward_sequence(const std::vector<Var<T>>& frames,
                                                    const std::vector<Var<T>>& voxels,
                                                    bool keep_traces) const {
  const int n = static_cast<int>(frames.size());
  if (n < 2) throw InvalidInput("forward_sequence: need at least 2 frames");
  if (static_cast<int>(voxels.size()) != n - 1) {
    throw InvalidInput("forward_sequence: " + std::to_string(voxels.size()) +
                       " voxel grids for " + std::to_string(n) + " frames (need T-1)");
  }
  const int h = frames[0].height();
  const int w = frames[0].width();
  for (const Var<T>& f : frames) {
    if (f.channels() != 3 || f.height() != h || f.width() != w) {
      throw InvalidInput("forward_sequence: frames must all be 3 x H x W");
    }
  }
  for (const Var<T>& v : voxels) {
    if (v.channels() != cfg_.bins || v.height() != h || v.width() != w) {
      throw InvalidInput("forward_sequence: voxel grid " + v.value().shape_string() +
                         " does not match " + std::to_string(cfg_.bins) + " bins at frame size");
    }
  }
  const int c = cfg_.channels;
  const Var<T> zero = zeros_var<T>(c, h, w);
  const auto sz = [](int i) { return static_cast<std::size_t>(i); };

  std::vector<Var<T>> backward_features(sz(n));
  if (cfg_.bidirectional) {
    Var<T> f = zero;
    for (int t = n - 1; t >= 0; --t) {
      std::vector<Var<T>> parts;
      if (t == n - 1) {
        if (cfg_.use_motion_branch) parts.push_back(zero);
        if (cfg_.use_texture_branch) parts.push_back(zero);
      } else {
        const Var<T> voxel = oriented_voxel(voxels[sz(t)], Direction::kBackward);
        if (cfg_.use_motion_branch) {
          parts.push_back(motion_feature(f, frames[sz(t)], frames[sz(t + 1)], voxel));
        }
        if (cfg_.use_texture_branch) {
          parts.push_back((*backward_ite_)(f, voxel, frames[sz(t)]));
        }
      }
      f = (*backward_fusion_)(frames[sz(t)], parts);
      backward_features[sz(t)] = f;
    }
  }

  SequenceOutput<T> out;
  Var<T> f = zero;
  for (int t = 0; t < n; ++t) {
    std::vector<Var<T>> parts;
    if (cfg_.bidirectional) parts.push_back(backward_features[sz(t)]);
    if (t == 0) {
      if (cfg_.use_motion_branch) parts.push_back(zero);
      if (cfg_.use_texture_branch) parts.push_back(zero);
    } else {
      const Var<T>& voxel = voxels[sz(t - 1)];
      if (cfg_.use_motion_branch) {
        parts.push_back(motion_feature(f, frames[sz(t)], frames[sz(t - 1)], voxel));
      }
      if (cfg_.use_texture_branch) {
        IteTrace<T> trace;
        parts.push_back((*forward_ite_)(f, voxel, frames[sz(t)], keep_traces ? &trace : nullptr));
        if (keep_traces) out.forward_traces.push_back(std::move(trace));
      }
    }
    f = (*forward_fusion_)(frames[sz(t)], parts);
    if (keep_traces) out.forward_features.push_back(f);
    out.frames.push_back(upsample(f, frames[sz(t)]));
  }
  return out;
}

template <typename T>
FrameSequence EvTextureNet<T>::infer(const FrameSequence& lr,
                                     const std::vector<VoxelGrid>& voxels) const {
  ad::NoGradGuard guard;
  std::vector<Var<T>> fv;
  std::vector<Var<T>> vv;
  for (const Image& f : lr.frames) fv.push_back(image_var<T>(f));
  for (const VoxelGrid& g : voxels) {
    if (!g.normalized) throw InvalidInput("infer: voxel grids must be normalized");
    vv.push_back(voxel_var<T>(g));
  }
  const SequenceOutput<T> out = forward_sequence(fv, vv);
  FrameSequence sr;
  sr.fps = lr.fps;
  for (const Var<T>& v : out.frames) sr.frames.push_back(v.value().template cast<float>());
  return sr;
}

template class IteModule<float>;
template class IteModule<double>;
template class FlowNet<float>;
template class FlowNet<double>;
template class Fusion<float>;
template class Fusion<double>;
template class Upsampler<float>;
template class Upsampler<double>;
template class EvTextureNet<float>;
template class EvTextureNet<double>;

}  // namespace evtexture
