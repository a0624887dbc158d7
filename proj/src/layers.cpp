#include "evtexture/layers.hpp"

#include <cmath>

namespace evtexture::nn {

template <typename T>
Var<T> ParameterStore<T>::add(const std::string& name, Tensor<T> init) {
  if (params_.contains(name)) throw InvalidInput("ParameterStore: duplicate name " + name);
  Var<T> v(std::move(init), true);
  params_.emplace(name, v);
  order_.push_back(name);
  return v;
}

template <typename T>
const Var<T>& ParameterStore<T>::at(const std::string& name) const {
  const auto it = params_.find(name);
  if (it == params_.end()) throw InvalidInput("ParameterStore: unknown parameter " + name);
  return it->second;
}

template <typename T>
Var<T>& ParameterStore<T>::at(const std::string& name) {
  const auto it = params_.find(name);
  if (it == params_.end()) throw InvalidInput("ParameterStore: unknown parameter " + name);
  return it->second;
}

template <typename T>
std::size_t ParameterStore<T>::scalar_count() const {
  std::size_t n = 0;
  for (const auto& [name, v] : params_) n += static_cast<std::size_t>(v.value().size());
  return n;
}

template <typename T>
void ParameterStore<T>::zero_grad() {
  for (auto& [name, v] : params_) v.zero_grad();
}

template <typename T>
std::size_t ParameterStore<T>::copy_matching(const ParameterStore& other) {
  std::size_t copied = 0;
  for (auto& [name, v] : params_) {
    const auto it = other.params_.find(name);
    if (it == other.params_.end() || !it->second.value().same_shape(v.value())) continue;
    v.mutable_value() = it->second.value();
    ++copied;
  }
  return copied;
}

template <typename T>
Conv2d<T>::Conv2d(ParameterStore<T>& store, const std::string& name, int in_channels,
                  int out_channels, int kernel, int stride, std::mt19937_64& rng, Init init)
    : in_(in_channels), out_(out_channels), kernel_(kernel), stride_(stride) {
  const int fan_in = in_channels * kernel * kernel;
  Tensor<T> w = Tensor<T>::zeros(out_channels, 1, fan_in);
  Tensor<T> b = Tensor<T>::zeros(out_channels, 1, 1);
  const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
  std::uniform_real_distribution<double> u(-bound, bound);
  if (init != Init::kZero) {
    for (Eigen::Index i = 0; i < w.size(); ++i) w.data()[i] = static_cast<T>(u(rng));
  }
  if (init == Init::kDefault) {
    for (Eigen::Index i = 0; i < b.size(); ++i) b.data()[i] = static_cast<T>(u(rng));
  }
  weight_ = store.add(name + ".weight", std::move(w));
  bias_ = store.add(name + ".bias", std::move(b));
}

template <typename T>
Var<T> Conv2d<T>::operator()(const Var<T>& x) const {
  if (x.channels() != in_) {
    throw InvalidInput("Conv2d: expected " + std::to_string(in_) + " input channels, got " +
                       std::to_string(x.channels()));
  }
  return ad::conv2d(x, weight_, bias_, kernel_, stride_, kernel_ / 2);
}

template <typename T>
ResidualBlock<T>::ResidualBlock(ParameterStore<T>& store, const std::string& name, int channels,
                                std::mt19937_64& rng)
    : conv1_(store, name + ".conv1", channels, channels, 3, 1, rng),
      conv2_(store, name + ".conv2", channels, channels, 3, 1, rng) {}

template <typename T>
Var<T> ResidualBlock<T>::operator()(const Var<T>& x) const {
  return ad::add(x, conv2_(ad::relu(conv1_(x))));
}

template <typename T>
UNet<T>::UNet(ParameterStore<T>& store, const std::string& name, int in_channels, int width,
              int out_channels, std::mt19937_64& rng, Init head_init) {
  const int half = std::max(1, width / 2);
  enc1_ = Conv2d<T>(store, name + ".enc1", in_channels, half, 3, 1, rng);
  down1_ = Conv2d<T>(store, name + ".down1", half, width, 3, 2, rng);
  down2_ = Conv2d<T>(store, name + ".down2", width, width, 3, 2, rng);
  bottleneck_ = Conv2d<T>(store, name + ".bottleneck", width, width, 3, 1, rng);
  up1_ = Conv2d<T>(store, name + ".up1", 2 * width, width, 3, 1, rng);
  up2_ = Conv2d<T>(store, name + ".up2", width + half, width, 3, 1, rng);
  head_ = Conv2d<T>(store, name + ".head", width, out_channels, 3, 1, rng, head_init);
}

template <typename T>
Var<T> UNet<T>::operator()(const Var<T>& x) const {
  const int h = x.height();
  const int w = x.width();
  const int ph = (h + 3) / 4 * 4;
  const int pw = (w + 3) / 4 * 4;
  Var<T> input = x;
  if (ph != h || pw != w) {
    input = ad::resample(x, ad::reflect_pad_matrix(h, ph), ad::reflect_pad_matrix(w, pw));
  }
  const T slope(0.1);
  const Var<T> e1 = ad::leaky_relu(enc1_(input), slope);
  const Var<T> e2 = ad::leaky_relu(down1_(e1), slope);
  Var<T> b = ad::leaky_relu(down2_(e2), slope);
  b = ad::leaky_relu(bottleneck_(b), slope);
  Var<T> u = ad::resample(b, ad::bilinear_upsample_matrix(b.height()),
                          ad::bilinear_upsample_matrix(b.width()));
  u = ad::leaky_relu(up1_(ad::concat<T>({u, e2})), slope);
  u = ad::resample(u, ad::bilinear_upsample_matrix(u.height()),
                   ad::bilinear_upsample_matrix(u.width()));
  u = ad::leaky_relu(up2_(ad::concat<T>({u, e1})), slope);
  Var<T> out = head_(u);
  if (ph != h || pw != w) out = ad::resample(out, ad::crop_matrix(ph, h), ad::crop_matrix(pw, w));
  return out;
}

template class ParameterStore<float>;
template class ParameterStore<double>;
template class Conv2d<float>;
template class Conv2d<double>;
template class ResidualBlock<float>;
template class ResidualBlock<double>;
template class UNet<float>;
template class UNet<double>;

}  // namespace evtexture::nn
