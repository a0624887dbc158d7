#pragma once

#include <Eigen/Core>

#include <cassert>
#include <string>
#include <vector>

#include "evtexture/errors.hpp"

namespace evtexture {

/// Dense C x H x W array. Storage is a row-major C x (H*W) Eigen matrix so a
/// channel is one contiguous row and convolutions map onto a single GEMM.
template <typename Scalar>
class Tensor {
 public:
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  using PlaneMap = Eigen::Map<Matrix>;
  using ConstPlaneMap = Eigen::Map<const Matrix>;

  Tensor() = default;
  Tensor(int channels, int height, int width)
      : channels_(channels), height_(height), width_(width), data_(channels, height * width) {}
  Tensor(int channels, int height, int width, Matrix data)
      : channels_(channels), height_(height), width_(width), data_(std::move(data)) {
    assert(data_.rows() == channels && data_.cols() == height * width);
  }

  static Tensor zeros(int channels, int height, int width) {
    return constant(channels, height, width, Scalar(0));
  }
  static Tensor constant(int channels, int height, int width, Scalar value) {
    Tensor t(channels, height, width);
    t.data_.setConstant(value);
    return t;
  }
  static Tensor zeros_like(const Tensor& other) {
    return zeros(other.channels_, other.height_, other.width_);
  }

  int channels() const { return channels_; }
  int height() const { return height_; }
  int width() const { return width_; }
  Eigen::Index size() const { return data_.size(); }
  bool empty() const { return data_.size() == 0; }

  bool same_shape(const Tensor& other) const {
    return channels_ == other.channels_ && height_ == other.height_ && width_ == other.width_;
  }
  std::string shape_string() const {
    return std::to_string(channels_) + "x" + std::to_string(height_) + "x" + std::to_string(width_);
  }

  Matrix& matrix() { return data_; }
  const Matrix& matrix() const { return data_; }

  Scalar& operator()(int c, int y, int x) { return data_(c, y * width_ + x); }
  Scalar operator()(int c, int y, int x) const { return data_(c, y * width_ + x); }

  /// One channel viewed as an H x W matrix.
  PlaneMap plane(int c) { return PlaneMap(data_.row(c).data(), height_, width_); }
  ConstPlaneMap plane(int c) const { return ConstPlaneMap(data_.row(c).data(), height_, width_); }

  Scalar* data() { return data_.data(); }
  const Scalar* data() const { return data_.data(); }

  template <typename Other>
  Tensor<Other> cast() const {
    return Tensor<Other>(channels_, height_, width_, data_.template cast<Other>());
  }

  bool all_finite() const { return data_.allFinite(); }

 private:
  int channels_ = 0;
  int height_ = 0;
  int width_ = 0;
  Matrix data_;
};

using Image = Tensor<float>;

/// Ordered frames in [0, 1] plus the capture rate used to place timestamps.
struct FrameSequence {
  std::vector<Image> frames;
  double fps = 25.0;

  int size() const { return static_cast<int>(frames.size()); }
  const Image& operator[](int t) const { return frames[static_cast<std::size_t>(t)]; }
  Image& operator[](int t) { return frames[static_cast<std::size_t>(t)]; }
};

inline void require_same_shape(const auto& a, const auto& b, const char* what) {
  if (!a.same_shape(b)) {
    throw InvalidInput(std::string(what) + ": shape mismatch " + a.shape_string() + " vs " +
                       b.shape_string());
  }
}

}  // namespace evtexture
