#pragma once

#include <Eigen/Core>

#include "evtexture/tensor.hpp"

namespace evtexture {

/// Catmull-Rom cubic (a = -0.5).
double cubic_kernel(double x);

/// Mirror an out-of-range index back into [0, n) with edge repetition
/// (... b a | a b c ... y z | z y ...).
int mirror_index(int i, int n);

/// Reflect without edge repetition (... c b | a b c ... y z | y x ...).
int reflect101_index(int i, int n);

/// out_size x in_size resampling matrix for bicubic interpolation. When
/// shrinking, the kernel is stretched by in/out so the operator also
/// low-pass filters. Rows sum to one. Every bicubic resize in the project,
/// frames and voxel bins alike, goes through this matrix.
Eigen::MatrixXd bicubic_matrix(int in_size, int out_size);

/// Per-channel separable linear map out = rows * X * cols^T, with rows
/// (H' x H) and cols (W' x W).
template <typename Scalar>
Tensor<Scalar> separable_apply(const Tensor<Scalar>& input,
                               const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& rows,
                               const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& cols) {
  assert(rows.cols() == input.height() && cols.cols() == input.width());
  Tensor<Scalar> out(input.channels(), static_cast<int>(rows.rows()), static_cast<int>(cols.rows()));
  for (int c = 0; c < input.channels(); ++c) {
    out.plane(c).noalias() = rows * input.plane(c) * cols.transpose();
  }
  return out;
}

/// Bicubic resize of every channel.
template <typename Scalar>
Tensor<Scalar> resize_bicubic(const Tensor<Scalar>& input, int out_height, int out_width) {
  using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  const Mat ry = bicubic_matrix(input.height(), out_height).template cast<Scalar>();
  const Mat rx = bicubic_matrix(input.width(), out_width).template cast<Scalar>();
  return separable_apply(input, ry, rx);
}

template <typename Scalar>
Tensor<Scalar> upsample_bicubic(const Tensor<Scalar>& input, int scale) {
  return resize_bicubic(input, input.height() * scale, input.width() * scale);
}

/// Antialiased bicubic shrink; both sides must divide by `scale`.
template <typename Scalar>
Tensor<Scalar> downsample_bicubic(const Tensor<Scalar>& input, int scale) {
  if (scale < 1 || input.height() % scale != 0 || input.width() % scale != 0) {
    throw InvalidInput("downsample_bicubic: " + input.shape_string() +
                       " not divisible by scale " + std::to_string(scale));
  }
  return resize_bicubic(input, input.height() / scale, input.width() / scale);
}

/// Normalized 1-D Gaussian taps of odd length `size`.
Eigen::VectorXd gaussian_kernel(int size, double sigma);

/// Separable Gaussian blur of an H x W plane with reflect-101 borders.
Eigen::MatrixXd gaussian_blur(const Eigen::MatrixXd& plane, int size, double sigma);

}  // namespace evtexture
