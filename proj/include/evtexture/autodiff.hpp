#pragma once

#include <functional>
#include <memory>
#include <vector>

#include "evtexture/tensor.hpp"

namespace evtexture::ad {

/// Graph recording switch. Recording is on by default; NoGradGuard turns it
/// off for the current thread within a scope.
class GradMode {
 public:
  static bool enabled();
  static void set_enabled(bool on);
};

class NoGradGuard {
 public:
  NoGradGuard() : previous_(GradMode::enabled()) { GradMode::set_enabled(false); }
  ~NoGradGuard() { GradMode::set_enabled(previous_); }
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

 private:
  bool previous_;
};

template <typename T>
struct Node {
  using Matrix = typename Tensor<T>::Matrix;

  Tensor<T> value;
  Tensor<T> grad;  // allocated lazily, same shape as value
  bool requires_grad = false;
  std::vector<std::shared_ptr<Node>> parents;
  std::function<void(Node&)> backward_fn;  // empty for leaves

  bool is_leaf() const { return !backward_fn; }
  /// grad += g, allocating on first use.
  void accumulate(const Matrix& g);
  Matrix& grad_matrix();
};

/// Handle to a node in the computation graph. Copies share the node, so a
/// parameter Var held by a module and the same Var seen inside a graph are
/// one object.
template <typename T>
class Var {
 public:
  using Matrix = typename Tensor<T>::Matrix;

  Var() = default;
  explicit Var(Tensor<T> value, bool requires_grad = false);

  const Tensor<T>& value() const { return node_->value; }
  /// In-place access for optimizers and test perturbation.
  Tensor<T>& mutable_value() { return node_->value; }
  bool has_grad() const { return node_->grad.size() > 0; }
  /// Zero tensor when nothing has flowed back yet.
  Tensor<T> grad() const;
  void zero_grad() { node_->grad = Tensor<T>(); }
  bool requires_grad() const { return node_->requires_grad; }
  bool defined() const { return static_cast<bool>(node_); }

  int channels() const { return node_->value.channels(); }
  int height() const { return node_->value.height(); }
  int width() const { return node_->value.width(); }

  const Node<T>* id() const { return node_.get(); }
  const std::shared_ptr<Node<T>>& node() const { return node_; }

  static Var from_node(std::shared_ptr<Node<T>> n) {
    Var v;
    v.node_ = std::move(n);
    return v;
  }

 private:
  std::shared_ptr<Node<T>> node_;
};

/// Reverse sweep from a 1x1x1 root, seeding d(root)/d(root) = 1. Gradients
/// accumulate into leaves; interior gradients are released as the sweep
/// passes them.
template <typename T>
void backward(const Var<T>& root);

template <typename T>
Var<T> constant(Tensor<T> value) {
  return Var<T>(std::move(value), false);
}

// Elementwise.
template <typename T> Var<T> add(const Var<T>& a, const Var<T>& b);
template <typename T> Var<T> sub(const Var<T>& a, const Var<T>& b);
template <typename T> Var<T> mul(const Var<T>& a, const Var<T>& b);
template <typename T> Var<T> scale(const Var<T>& a, T factor);
template <typename T> Var<T> sigmoid(const Var<T>& a);
template <typename T> Var<T> tanh(const Var<T>& a);
template <typename T> Var<T> relu(const Var<T>& a);
template <typename T> Var<T> leaky_relu(const Var<T>& a, T slope = T(0.1));

// Channel plumbing.
template <typename T> Var<T> concat(const std::vector<Var<T>>& parts);
template <typename T> Var<T> slice_channels(const Var<T>& a, int start, int count);
/// Channel order reversed (c -> C-1-c), each channel multiplied by `sign`.
template <typename T> Var<T> reverse_channels(const Var<T>& a, T sign);

/// 2-D cross-correlation. weight holds Cout x 1 x (Cin*k*k) row-major
/// (ci, ky, kx) taps; bias is Cout x 1 x 1. Zero padding.
template <typename T>
Var<T> conv2d(const Var<T>& x, const Var<T>& weight, const Var<T>& bias, int kernel, int stride,
              int pad);

/// (C*r*r) x H x W -> C x (H*r) x (W*r); input channel c*r*r + i*r + j lands
/// at output offset (i, j) of cell c.
template <typename T> Var<T> pixel_shuffle(const Var<T>& x, int r);

/// Separable linear map applied per channel: out = rows * X * cols^T, with
/// rows (H' x H) and cols (W' x W). Resizing, pooling, padding and cropping
/// are all expressed this way.
template <typename T>
Var<T> resample(const Var<T>& x, const Eigen::MatrixXd& rows, const Eigen::MatrixXd& cols);

/// Bilinear backward warp with border clamping: out(c, y, x) samples the
/// feature at (y + v(y, x), x + u(y, x)); flow channel 0 is u, 1 is v.
template <typename T> Var<T> warp(const Var<T>& feature, const Var<T>& flow);

/// Sum of all entries as a 1x1x1 Var.
template <typename T> Var<T> sum(const Var<T>& a);

/// mean(sqrt((pred - target)^2 + eps^2)) as a 1x1x1 Var.
template <typename T> Var<T> charbonnier(const Var<T>& pred, const Var<T>& target, T eps);

// Resampling matrices used with resample().
Eigen::MatrixXd bilinear_upsample_matrix(int in_size);   // 2x, half-pixel centers
Eigen::MatrixXd average_pool_matrix(int in_size);        // 2x shrink, in_size even
Eigen::MatrixXd reflect_pad_matrix(int in_size, int padded_size);
Eigen::MatrixXd crop_matrix(int in_size, int out_size);  // keeps the first out_size

}  // namespace evtexture::ad
