#include "evtexture/autodiff.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

#include "evtexture/resample.hpp"

namespace evtexture::ad {

namespace {
thread_local bool g_grad_enabled = true;
}  // namespace

bool GradMode::enabled() { return g_grad_enabled; }
void GradMode::set_enabled(bool on) { g_grad_enabled = on; }

template <typename T>
typename Node<T>::Matrix& Node<T>::grad_matrix() {
  if (grad.size() == 0) grad = Tensor<T>::zeros_like(value);
  return grad.matrix();
}

template <typename T>
void Node<T>::accumulate(const Matrix& g) {
  if (grad.size() == 0) {
    grad = Tensor<T>(value.channels(), value.height(), value.width(), g);
  } else {
    grad.matrix() += g;
  }
}

template <typename T>
Var<T>::Var(Tensor<T> value, bool requires_grad) : node_(std::make_shared<Node<T>>()) {
  node_->value = std::move(value);
  node_->requires_grad = requires_grad;
}

template <typename T>
Tensor<T> Var<T>::grad() const {
  if (node_->grad.size() > 0) return node_->grad;
  return Tensor<T>::zeros_like(node_->value);
}

template <typename T>
void backward(const Var<T>& root) {
  if (root.value().size() != 1) throw InvalidInput("backward: root must be a scalar");
  if (!root.requires_grad()) return;

  // Post-order DFS gives children after parents when reversed.
  std::vector<Node<T>*> order;
  std::unordered_set<Node<T>*> visited;
  std::vector<std::pair<Node<T>*, std::size_t>> stack;
  stack.emplace_back(root.node().get(), 0);
  visited.insert(root.node().get());
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    if (next < node->parents.size()) {
      Node<T>* parent = node->parents[next++].get();
      if (parent->requires_grad && !visited.contains(parent)) {
        visited.insert(parent);
        stack.emplace_back(parent, 0);
      }
    } else {
      order.push_back(node);
      stack.pop_back();
    }
  }

  typename Node<T>::Matrix seed(1, 1);
  seed(0, 0) = T(1);
  root.node()->accumulate(seed);
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    Node<T>* node = *it;
    if (node->is_leaf() || node->grad.size() == 0) continue;
    node->backward_fn(*node);
    node->grad = Tensor<T>();
  }
}

namespace {

template <typename T>
using NodePtr = std::shared_ptr<Node<T>>;

template <typename T>
Var<T> make_result(Tensor<T> value, std::vector<NodePtr<T>> parents,
                   std::function<void(Node<T>&)> fn) {
  auto node = std::make_shared<Node<T>>();
  node->value = std::move(value);
  const bool needs = GradMode::enabled() &&
                     std::any_of(parents.begin(), parents.end(),
                                 [](const NodePtr<T>& p) { return p->requires_grad; });
  if (needs) {
    node->requires_grad = true;
    node->parents = std::move(parents);
    node->backward_fn = std::move(fn);
  }
  return Var<T>::from_node(std::move(node));
}

template <typename T>
bool wants(const Node<T>& self, std::size_t i) {
  return self.parents[i]->requires_grad;
}

template <typename T>
typename Tensor<T>::Matrix im2col(const Tensor<T>& x, int k, int stride, int pad, int oh, int ow) {
  const int cin = x.channels();
  const int h = x.height();
  const int w = x.width();
  typename Tensor<T>::Matrix cols(cin * k * k, oh * ow);
  for (int ci = 0; ci < cin; ++ci) {
    const T* src = x.data() + static_cast<Eigen::Index>(ci) * h * w;
    for (int ky = 0; ky < k; ++ky) {
      for (int kx = 0; kx < k; ++kx) {
        T* dst = cols.row((ci * k + ky) * k + kx).data();
        for (int oy = 0; oy < oh; ++oy) {
          const int iy = oy * stride - pad + ky;
          T* drow = dst + static_cast<Eigen::Index>(oy) * ow;
          if (iy < 0 || iy >= h) {
            std::fill(drow, drow + ow, T(0));
            continue;
          }
          const T* srow = src + static_cast<Eigen::Index>(iy) * w;
          if (stride == 1) {
            const int lo = std::max(0, pad - kx);
            const int hi = std::min(ow, w + pad - kx);
            std::fill(drow, drow + lo, T(0));
            if (hi > lo) std::copy(srow + lo - pad + kx, srow + hi - pad + kx, drow + lo);
            std::fill(drow + std::max(hi, lo), drow + ow, T(0));
          } else {
            for (int ox = 0; ox < ow; ++ox) {
              const int ix = ox * stride - pad + kx;
              drow[ox] = (ix >= 0 && ix < w) ? srow[ix] : T(0);
            }
          }
        }
      }
    }
  }
  return cols;
}

template <typename T>
void col2im_add(const typename Tensor<T>::Matrix& cols, int k, int stride, int pad, int oh, int ow,
                typename Tensor<T>::Matrix& dx, int cin, int h, int w) {
  for (int ci = 0; ci < cin; ++ci) {
    T* dst = dx.row(ci).data();
    for (int ky = 0; ky < k; ++ky) {
      for (int kx = 0; kx < k; ++kx) {
        const T* src = cols.row((ci * k + ky) * k + kx).data();
        for (int oy = 0; oy < oh; ++oy) {
          const int iy = oy * stride - pad + ky;
          if (iy < 0 || iy >= h) continue;
          const T* srow = src + static_cast<Eigen::Index>(oy) * ow;
          T* drow = dst + static_cast<Eigen::Index>(iy) * w;
          for (int ox = 0; ox < ow; ++ox) {
            const int ix = ox * stride - pad + kx;
            if (ix >= 0 && ix < w) drow[ix] += srow[ox];
          }
        }
      }
    }
  }
}

template <typename T>
typename Tensor<T>::Matrix cast_matrix(const Eigen::MatrixXd& m) {
  return m.cast<T>();
}

}  // namespace

template <typename T>
Var<T> add(const Var<T>& a, const Var<T>& b) {
  require_same_shape(a.value(), b.value(), "add");
  Tensor<T> v(a.channels(), a.height(), a.width(), a.value().matrix() + b.value().matrix());
  return make_result<T>(std::move(v), {a.node(), b.node()}, [](Node<T>& self) {
    if (wants(self, 0)) self.parents[0]->accumulate(self.grad.matrix());
    if (wants(self, 1)) self.parents[1]->accumulate(self.grad.matrix());
  });
}

template <typename T>
Var<T> sub(const Var<T>& a, const Var<T>& b) {
  require_same_shape(a.value(), b.value(), "sub");
  Tensor<T> v(a.channels(), a.height(), a.width(), a.value().matrix() - b.value().matrix());
  return make_result<T>(std::move(v), {a.node(), b.node()}, [](Node<T>& self) {
    if (wants(self, 0)) self.parents[0]->accumulate(self.grad.matrix());
    if (wants(self, 1)) self.parents[1]->accumulate(-self.grad.matrix());
  });
}

template <typename T>
Var<T> mul(const Var<T>& a, const Var<T>& b) {
  require_same_shape(a.value(), b.value(), "mul");
  Tensor<T> v(a.channels(), a.height(), a.width(),
              a.value().matrix().cwiseProduct(b.value().matrix()));
  return make_result<T>(std::move(v), {a.node(), b.node()}, [](Node<T>& self) {
    const auto& g = self.grad.matrix();
    if (wants(self, 0)) self.parents[0]->accumulate(g.cwiseProduct(self.parents[1]->value.matrix()));
    if (wants(self, 1)) self.parents[1]->accumulate(g.cwiseProduct(self.parents[0]->value.matrix()));
  });
}

template <typename T>
Var<T> scale(const Var<T>& a, T factor) {
  Tensor<T> v(a.channels(), a.height(), a.width(), a.value().matrix() * factor);
  return make_result<T>(std::move(v), {a.node()}, [factor](Node<T>& self) {
    self.parents[0]->accumulate(self.grad.matrix() * factor);
  });
}

template <typename T>
Var<T> sigmoid(const Var<T>& a) {
  Tensor<T> v(a.channels(), a.height(), a.width(),
              (T(1) / (T(1) + (-a.value().matrix().array()).exp())).matrix());
  return make_result<T>(std::move(v), {a.node()}, [](Node<T>& self) {
    const auto s = self.value.matrix().array();
    self.parents[0]->accumulate((self.grad.matrix().array() * s * (T(1) - s)).matrix());
  });
}

template <typename T>
Var<T> tanh(const Var<T>& a) {
  Tensor<T> v(a.channels(), a.height(), a.width(), a.value().matrix().array().tanh().matrix());
  return make_result<T>(std::move(v), {a.node()}, [](Node<T>& self) {
    const auto y = self.value.matrix().array();
    self.parents[0]->accumulate((self.grad.matrix().array() * (T(1) - y * y)).matrix());
  });
}

template <typename T>
Var<T> relu(const Var<T>& a) {
  return leaky_relu(a, T(0));
}

template <typename T>
Var<T> leaky_relu(const Var<T>& a, T slope) {
  const auto x = a.value().matrix().array();
  Tensor<T> v(a.channels(), a.height(), a.width(), (x > T(0)).select(x, x * slope).matrix());
  return make_result<T>(std::move(v), {a.node()}, [slope](Node<T>& self) {
    const auto xin = self.parents[0]->value.matrix().array();
    const auto g = self.grad.matrix().array();
    self.parents[0]->accumulate((xin > T(0)).select(g, g * slope).matrix());
  });
}

template <typename T>
Var<T> concat(const std::vector<Var<T>>& parts) {
  if (parts.empty()) throw InvalidInput("concat: no inputs");
  const int h = parts[0].height();
  const int w = parts[0].width();
  int channels = 0;
  for (const Var<T>& p : parts) {
    if (p.height() != h || p.width() != w) {
      throw InvalidInput("concat: spatial mismatch " + p.value().shape_string() + " vs " +
                         parts[0].value().shape_string());
    }
    channels += p.channels();
  }
  Tensor<T> v(channels, h, w);
  std::vector<NodePtr<T>> parents;
  std::vector<int> offsets;
  int offset = 0;
  for (const Var<T>& p : parts) {
    v.matrix().middleRows(offset, p.channels()) = p.value().matrix();
    parents.push_back(p.node());
    offsets.push_back(offset);
    offset += p.channels();
  }
  return make_result<T>(std::move(v), std::move(parents), [offsets](Node<T>& self) {
    for (std::size_t i = 0; i < self.parents.size(); ++i) {
      if (!wants(self, i)) continue;
      const int n = self.parents[i]->value.channels();
      self.parents[i]->accumulate(self.grad.matrix().middleRows(offsets[i], n));
    }
  });
}

template <typename T>
Var<T> slice_channels(const Var<T>& a, int start, int count) {
  if (start < 0 || count < 1 || start + count > a.channels()) {
    throw InvalidInput("slice_channels: range out of bounds");
  }
  Tensor<T> v(count, a.height(), a.width(), a.value().matrix().middleRows(start, count));
  return make_result<T>(std::move(v), {a.node()}, [start, count](Node<T>& self) {
    self.parents[0]->grad_matrix().middleRows(start, count) += self.grad.matrix();
  });
}

template <typename T>
Var<T> reverse_channels(const Var<T>& a, T sign) {
  const int c = a.channels();
  Tensor<T> v(c, a.height(), a.width(), a.value().matrix().colwise().reverse() * sign);
  return make_result<T>(std::move(v), {a.node()}, [sign](Node<T>& self) {
    self.parents[0]->accumulate(self.grad.matrix().colwise().reverse() * sign);
  });
}

template <typename T>
Var<T> conv2d(const Var<T>& x, const Var<T>& weight, const Var<T>& bias, int kernel, int stride,
              int pad) {
  const int cin = x.channels();
  const int h = x.height();
  const int w = x.width();
  const int cout = weight.channels();
  if (weight.value().width() != cin * kernel * kernel) {
    throw InvalidInput("conv2d: weight expects " +
                       std::to_string(weight.value().width() / (kernel * kernel)) +
                       " input channels, got " + std::to_string(cin));
  }
  if (bias.channels() != cout) throw InvalidInput("conv2d: bias size mismatch");
  const int oh = (h + 2 * pad - kernel) / stride + 1;
  const int ow = (w + 2 * pad - kernel) / stride + 1;
  if (oh < 1 || ow < 1) throw InvalidInput("conv2d: input smaller than kernel");
  const bool pointwise = kernel == 1 && stride == 1 && pad == 0;

  typename Tensor<T>::Matrix out(cout, oh * ow);
  if (pointwise) {
    out.noalias() = weight.value().matrix() * x.value().matrix();
  } else {
    out.noalias() = weight.value().matrix() * im2col(x.value(), kernel, stride, pad, oh, ow);
  }
  out.colwise() += bias.value().matrix().col(0);

  Tensor<T> v(cout, oh, ow, std::move(out));
  return make_result<T>(
      std::move(v), {x.node(), weight.node(), bias.node()},
      [=](Node<T>& self) {
        const auto& g = self.grad.matrix();
        const Tensor<T>& xin = self.parents[0]->value;
        const auto& wm = self.parents[1]->value.matrix();
        if (pointwise) {
          if (wants(self, 1)) self.parents[1]->accumulate(g * xin.matrix().transpose());
          if (wants(self, 0)) self.parents[0]->accumulate(wm.transpose() * g);
        } else {
          if (wants(self, 1)) {
            self.parents[1]->accumulate(g * im2col(xin, kernel, stride, pad, oh, ow).transpose());
          }
          if (wants(self, 0)) {
            const typename Tensor<T>::Matrix dcols = wm.transpose() * g;
            col2im_add<T>(dcols, kernel, stride, pad, oh, ow, self.parents[0]->grad_matrix(), cin,
                          h, w);
          }
        }
        if (wants(self, 2)) self.parents[2]->accumulate(g.rowwise().sum());
      });
}

template <typename T>
Var<T> pixel_shuffle(const Var<T>& x, int r) {
  const int cin = x.channels();
  if (r < 1 || cin % (r * r) != 0) throw InvalidInput("pixel_shuffle: channels not divisible by r^2");
  const int c = cin / (r * r);
  const int h = x.height();
  const int w = x.width();
  Tensor<T> v(c, h * r, w * r);
  const Tensor<T>& in = x.value();
  for (int co = 0; co < c; ++co) {
    for (int i = 0; i < r; ++i) {
      for (int j = 0; j < r; ++j) {
        const int ci = co * r * r + i * r + j;
        for (int y = 0; y < h; ++y) {
          for (int xx = 0; xx < w; ++xx) v(co, y * r + i, xx * r + j) = in(ci, y, xx);
        }
      }
    }
  }
  return make_result<T>(std::move(v), {x.node()}, [=](Node<T>& self) {
    Tensor<T> g(cin, h, w);
    for (int co = 0; co < c; ++co) {
      for (int i = 0; i < r; ++i) {
        for (int j = 0; j < r; ++j) {
          const int ci = co * r * r + i * r + j;
          for (int y = 0; y < h; ++y) {
            for (int xx = 0; xx < w; ++xx) g(ci, y, xx) = self.grad(co, y * r + i, xx * r + j);
          }
        }
      }
    }
    self.parents[0]->accumulate(g.matrix());
  });
}

template <typename T>
Var<T> resample(const Var<T>& x, const Eigen::MatrixXd& rows, const Eigen::MatrixXd& cols) {
  if (rows.cols() != x.height() || cols.cols() != x.width()) {
    throw InvalidInput("resample: matrix does not match input " + x.value().shape_string());
  }
  using Mat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic>;
  Mat r = rows.cast<T>();
  Mat c = cols.cast<T>();
  Tensor<T> v = separable_apply(x.value(), r, c);
  return make_result<T>(std::move(v), {x.node()},
                        [r = std::move(r), c = std::move(c)](Node<T>& self) {
                          const Mat rt = r.transpose();
                          const Mat ct = c.transpose();
                          self.parents[0]->accumulate(separable_apply(self.grad, rt, ct).matrix());
                        });
}

template <typename T>
Var<T> warp(const Var<T>& feature, const Var<T>& flow) {
  const Tensor<T>& f = feature.value();
  const Tensor<T>& fl = flow.value();
  if (fl.channels() != 2 || fl.height() != f.height() || fl.width() != f.width()) {
    throw InvalidInput("warp: flow " + fl.shape_string() + " does not match feature " +
                       f.shape_string());
  }
  if (!fl.all_finite()) throw InvalidInput("warp: non-finite flow");
  const int c = f.channels();
  const int h = f.height();
  const int w = f.width();

  struct Tap {
    int x0, x1, y0, y1;
    T ax, ay;
    bool inside_x, inside_y;
  };
  std::vector<Tap> taps(static_cast<std::size_t>(h) * w);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const T sx_raw = T(x) + fl(0, y, x);
      const T sy_raw = T(y) + fl(1, y, x);
      const T sx = std::clamp(sx_raw, T(0), T(w - 1));
      const T sy = std::clamp(sy_raw, T(0), T(h - 1));
      Tap t;
      t.x0 = std::min(static_cast<int>(std::floor(sx)), w - 1);
      t.y0 = std::min(static_cast<int>(std::floor(sy)), h - 1);
      t.x1 = std::min(t.x0 + 1, w - 1);
      t.y1 = std::min(t.y0 + 1, h - 1);
      t.ax = sx - T(t.x0);
      t.ay = sy - T(t.y0);
      t.inside_x = sx_raw >= T(0) && sx_raw <= T(w - 1);
      t.inside_y = sy_raw >= T(0) && sy_raw <= T(h - 1);
      taps[static_cast<std::size_t>(y) * w + x] = t;
    }
  }

  Tensor<T> v(c, h, w);
  for (int ch = 0; ch < c; ++ch) {
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        const Tap& t = taps[static_cast<std::size_t>(y) * w + x];
        v(ch, y, x) = (T(1) - t.ay) * ((T(1) - t.ax) * f(ch, t.y0, t.x0) + t.ax * f(ch, t.y0, t.x1)) +
                      t.ay * ((T(1) - t.ax) * f(ch, t.y1, t.x0) + t.ax * f(ch, t.y1, t.x1));
      }
    }
  }

  return make_result<T>(
      std::move(v), {feature.node(), flow.node()},
      [taps = std::move(taps), c, h, w](Node<T>& self) {
        const Tensor<T>& g = self.grad;
        const Tensor<T>& fin = self.parents[0]->value;
        const bool want_f = wants(self, 0);
        const bool want_flow = wants(self, 1);
        Tensor<T> df;
        Tensor<T> dflow;
        if (want_f) df = Tensor<T>::zeros(c, h, w);
        if (want_flow) dflow = Tensor<T>::zeros(2, h, w);
        for (int ch = 0; ch < c; ++ch) {
          for (int y = 0; y < h; ++y) {
            for (int x = 0; x < w; ++x) {
              const Tap& t = taps[static_cast<std::size_t>(y) * w + x];
              const T go = g(ch, y, x);
              if (want_f) {
                df(ch, t.y0, t.x0) += go * (T(1) - t.ay) * (T(1) - t.ax);
                df(ch, t.y0, t.x1) += go * (T(1) - t.ay) * t.ax;
                df(ch, t.y1, t.x0) += go * t.ay * (T(1) - t.ax);
                df(ch, t.y1, t.x1) += go * t.ay * t.ax;
              }
              if (want_flow) {
                const T f00 = fin(ch, t.y0, t.x0);
                const T f01 = fin(ch, t.y0, t.x1);
                const T f10 = fin(ch, t.y1, t.x0);
                const T f11 = fin(ch, t.y1, t.x1);
                if (t.inside_x) {
                  dflow(0, y, x) += go * ((T(1) - t.ay) * (f01 - f00) + t.ay * (f11 - f10));
                }
                if (t.inside_y) {
                  dflow(1, y, x) += go * ((T(1) - t.ax) * (f10 - f00) + t.ax * (f11 - f01));
                }
              }
            }
          }
        }
        if (want_f) self.parents[0]->accumulate(df.matrix());
        if (want_flow) self.parents[1]->accumulate(dflow.matrix());
      });
}

template <typename T>
Var<T> sum(const Var<T>& a) {
  Tensor<T> v(1, 1, 1);
  v(0, 0, 0) = a.value().matrix().sum();
  return make_result<T>(std::move(v), {a.node()}, [](Node<T>& self) {
    const auto& in = self.parents[0]->value;
    self.parents[0]->accumulate(
        Node<T>::Matrix::Constant(in.channels(), in.height() * in.width(), self.grad(0, 0, 0)));
  });
}

template <typename T>
Var<T> charbonnier(const Var<T>& pred, const Var<T>& target, T eps) {
  require_same_shape(pred.value(), target.value(), "charbonnier");
  const auto d = (pred.value().matrix() - target.value().matrix()).array();
  const T n = static_cast<T>(d.size());
  Tensor<T> v(1, 1, 1);
  v(0, 0, 0) = (d * d + eps * eps).sqrt().sum() / n;
  return make_result<T>(std::move(v), {pred.node(), target.node()}, [eps, n](Node<T>& self) {
    const auto diff = (self.parents[0]->value.matrix() - self.parents[1]->value.matrix()).array();
    const typename Node<T>::Matrix g =
        (diff / (diff * diff + eps * eps).sqrt() * (self.grad(0, 0, 0) / n)).matrix();
    if (wants(self, 0)) self.parents[0]->accumulate(g);
    if (wants(self, 1)) self.parents[1]->accumulate(-g);
  });
}

Eigen::MatrixXd bilinear_upsample_matrix(int in_size) {
  const int out_size = 2 * in_size;
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(out_size, in_size);
  for (int o = 0; o < out_size; ++o) {
    const double src = std::max(0.0, (o + 0.5) / 2.0 - 0.5);
    const int i0 = std::min(static_cast<int>(std::floor(src)), in_size - 1);
    const int i1 = std::min(i0 + 1, in_size - 1);
    const double a = src - i0;
    m(o, i0) += 1.0 - a;
    m(o, i1) += a;
  }
  return m;
}

Eigen::MatrixXd average_pool_matrix(int in_size) {
  if (in_size % 2 != 0) throw InvalidInput("average_pool_matrix: odd size");
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(in_size / 2, in_size);
  for (int o = 0; o < in_size / 2; ++o) {
    m(o, 2 * o) = 0.5;
    m(o, 2 * o + 1) = 0.5;
  }
  return m;
}

Eigen::MatrixXd reflect_pad_matrix(int in_size, int padded_size) {
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(padded_size, in_size);
  for (int o = 0; o < padded_size; ++o) m(o, reflect101_index(o, in_size)) = 1.0;
  return m;
}

Eigen::MatrixXd crop_matrix(int in_size, int out_size) {
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(out_size, in_size);
  for (int o = 0; o < out_size; ++o) m(o, o) = 1.0;
  return m;
}

#define EVTEXTURE_INSTANTIATE(T)                                                               \
  template struct Node<T>;                                                                     \
  template class Var<T>;                                                                       \
  template void backward<T>(const Var<T>&);                                                    \
  template Var<T> add<T>(const Var<T>&, const Var<T>&);                                        \
  template Var<T> sub<T>(const Var<T>&, const Var<T>&);                                        \
  template Var<T> mul<T>(const Var<T>&, const Var<T>&);                                        \
  template Var<T> scale<T>(const Var<T>&, T);                                                  \
  template Var<T> sigmoid<T>(const Var<T>&);                                                   \
  template Var<T> tanh<T>(const Var<T>&);                                                      \
  template Var<T> relu<T>(const Var<T>&);                                                      \
  template Var<T> leaky_relu<T>(const Var<T>&, T);                                             \
  template Var<T> concat<T>(const std::vector<Var<T>>&);                                       \
  template Var<T> slice_channels<T>(const Var<T>&, int, int);                                  \
  template Var<T> reverse_channels<T>(const Var<T>&, T);                                       \
  template Var<T> conv2d<T>(const Var<T>&, const Var<T>&, const Var<T>&, int, int, int);       \
  template Var<T> pixel_shuffle<T>(const Var<T>&, int);                                        \
  template Var<T> resample<T>(const Var<T>&, const Eigen::MatrixXd&, const Eigen::MatrixXd&);  \
  template Var<T> warp<T>(const Var<T>&, const Var<T>&);                                       \
  template Var<T> sum<T>(const Var<T>&);                                                       \
  template Var<T> charbonnier<T>(const Var<T>&, const Var<T>&, T);

EVTEXTURE_INSTANTIATE(float)
EVTEXTURE_INSTANTIATE(double)

#undef EVTEXTURE_INSTANTIATE

}  // namespace evtexture::ad
