#include "evtexture/resample.hpp"

#include <cmath>

namespace evtexture {

double cubic_kernel(double x) {
  const double a = -0.5;
  const double ax = std::abs(x);
  if (ax <= 1.0) return ((a + 2.0) * ax - (a + 3.0)) * ax * ax + 1.0;
  if (ax < 2.0) return ((a * ax - 5.0 * a) * ax + 8.0 * a) * ax - 4.0 * a;
  return 0.0;
}

int mirror_index(int i, int n) {
  const int period = 2 * n;
  i %= period;
  if (i < 0) i += period;
  return i < n ? i : period - 1 - i;
}

int reflect101_index(int i, int n) {
  if (n == 1) return 0;
  const int period = 2 * (n - 1);
  i %= period;
  if (i < 0) i += period;
  return i < n ? i : period - i;
}

Eigen::MatrixXd bicubic_matrix(int in_size, int out_size) {
  if (in_size < 1 || out_size < 1) throw InvalidInput("bicubic_matrix: empty axis");
  const double scale = static_cast<double>(out_size) / in_size;
  const bool shrink = scale < 1.0;
  const double stretch = shrink ? 1.0 / scale : 1.0;
  const double support = 2.0 * stretch;

  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(out_size, in_size);
  for (int o = 0; o < out_size; ++o) {
    const double center = (o + 0.5) / scale - 0.5;
    const int left = static_cast<int>(std::floor(center - support));
    const int right = static_cast<int>(std::ceil(center + support));
    double total = 0.0;
    for (int j = left; j <= right; ++j) {
      const double w = cubic_kernel((center - j) / stretch);
      if (w == 0.0) continue;
      m(o, mirror_index(j, in_size)) += w;
      total += w;
    }
    m.row(o) /= total;
  }
  return m;
}

Eigen::VectorXd gaussian_kernel(int size, double sigma) {
  if (size < 1 || size % 2 == 0 || sigma <= 0.0) {
    throw InvalidInput("gaussian_kernel: size must be odd and sigma positive");
  }
  Eigen::VectorXd k(size);
  const double c = (size - 1) / 2.0;
  for (int i = 0; i < size; ++i) {
    const double d = i - c;
    k(i) = std::exp(-d * d / (2.0 * sigma * sigma));
  }
  return k / k.sum();
}

Eigen::MatrixXd gaussian_blur(const Eigen::MatrixXd& plane, int size, double sigma) {
  const Eigen::VectorXd k = gaussian_kernel(size, sigma);
  const int r = size / 2;
  const auto h = static_cast<int>(plane.rows());
  const auto w = static_cast<int>(plane.cols());
  Eigen::MatrixXd tmp(h, w);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int i = -r; i <= r; ++i) acc += k(i + r) * plane(y, reflect101_index(x + i, w));
      tmp(y, x) = acc;
    }
  }
  Eigen::MatrixXd out(h, w);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int i = -r; i <= r; ++i) acc += k(i + r) * tmp(reflect101_index(y + i, h), x);
      out(y, x) = acc;
    }
  }
  return out;
}

}  // namespace evtexture
