#pragma once

// Reference implementations the tests compare the library against. They are
// written for clarity, loop by loop, and share no code with src/.

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "evtexture/events.hpp"
#include "evtexture/network.hpp"

namespace evtexture::testing {

inline EventStream random_stream(std::mt19937_64& rng, int count, int width, int height) {
  std::uniform_int_distribution<int> px(0, width - 1);
  std::uniform_int_distribution<int> py(0, height - 1);
  std::uniform_real_distribution<double> pt(0.0, 1.0);
  EventStream s;
  s.width = width;
  s.height = height;
  for (int i = 0; i < count; ++i) {
    s.events.push_back({px(rng), py(rng), 3.0 + pt(rng), rng() % 2 == 0 ? 1 : -1});
  }
  std::sort(s.events.begin(), s.events.end(),
            [](const Event& a, const Event& b) { return a.t < b.t; });
  s.t_start = s.events.front().t;
  s.t_end = s.events.back().t;
  return s;
}

/// One event at a time, straight from the kernel definition with 1-based bins.
inline Tensor<double> voxel_oracle(const EventStream& s, int bins) {
  Tensor<double> v = Tensor<double>::zeros(bins, s.height, s.width);
  if (s.events.empty()) return v;
  const double t0 = s.events.front().t;
  const double tn = s.events.back().t;
  for (const Event& e : s.events) {
    const double u = (e.t - t0) / (tn - t0) * (bins - 1);
    for (int i = 1; i <= bins; ++i) {
      v(i - 1, e.y, e.x) += e.p * std::max(0.0, 1.0 - std::abs((i - 1) - u));
    }
  }
  return v;
}

inline double max_abs_diff(const Tensor<double>& a, const Tensor<double>& b) {
  return (a.matrix() - b.matrix()).cwiseAbs().maxCoeff();
}

/// Crossing count for a log-intensity path sampled densely between the given
/// knots: the reference level follows the path in steps of c.
struct CrossingCount {
  int positive = 0;
  int negative = 0;
};

inline CrossingCount crossing_oracle(const std::vector<double>& knots, double c,
                                     int samples_per_segment = 4000) {
  CrossingCount out;
  double ref = knots.front();
  for (std::size_t k = 0; k + 1 < knots.size(); ++k) {
    for (int s = 1; s <= samples_per_segment; ++s) {
      const double l = knots[k] + (knots[k + 1] - knots[k]) * s / samples_per_segment;
      while (l - ref >= c - 1e-9) {
        ref += c;
        ++out.positive;
      }
      while (ref - l >= c - 1e-9) {
        ref -= c;
        ++out.negative;
      }
    }
  }
  return out;
}

/// Zero-padded 3x3 cross-correlation with the library's weight layout
/// (Cout rows, taps ordered input channel, ky, kx).
inline Tensor<double> conv3x3_oracle(const Tensor<double>& x, const Tensor<double>& w,
                                     const Tensor<double>& b) {
  const int cout = w.channels();
  const int cin = x.channels();
  Tensor<double> out = Tensor<double>::zeros(cout, x.height(), x.width());
  for (int o = 0; o < cout; ++o) {
    for (int y = 0; y < x.height(); ++y) {
      for (int xx = 0; xx < x.width(); ++xx) {
        double acc = b(o, 0, 0);
        for (int ci = 0; ci < cin; ++ci) {
          for (int ky = 0; ky < 3; ++ky) {
            for (int kx = 0; kx < 3; ++kx) {
              const int sy = y + ky - 1;
              const int sx = xx + kx - 1;
              if (sy < 0 || sy >= x.height() || sx < 0 || sx >= x.width()) continue;
              acc += w(o, 0, (ci * 3 + ky) * 3 + kx) * x(ci, sy, sx);
            }
          }
        }
        out(o, y, xx) = acc;
      }
    }
  }
  return out;
}

inline Tensor<double> stack(const std::vector<Tensor<double>>& parts) {
  int c = 0;
  for (const auto& p : parts) c += p.channels();
  Tensor<double> out(c, parts[0].height(), parts[0].width());
  int at = 0;
  for (const auto& p : parts) {
    for (int i = 0; i < p.channels(); ++i) out.matrix().row(at++) = p.matrix().row(i);
  }
  return out;
}

template <typename T>
Tensor<T> random_tensor(std::mt19937_64& rng, int c, int h, int w, double lo = -1.0,
                        double hi = 1.0) {
  std::uniform_real_distribution<double> d(lo, hi);
  Tensor<T> t(c, h, w);
  for (Eigen::Index i = 0; i < t.size(); ++i) t.data()[i] = static_cast<T>(d(rng));
  return t;
}

/// Adds uniform noise of the given amplitude to every parameter, so the
/// zero-initialized heads stop blocking gradients.
template <typename T>
void perturb_parameters(nn::ParameterStore<T>& store, std::uint64_t seed, double amplitude) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> d(-amplitude, amplitude);
  for (const auto& name : store.names()) {
    Tensor<T>& v = store.at(name).mutable_value();
    for (Eigen::Index i = 0; i < v.size(); ++i) v.data()[i] += static_cast<T>(d(rng));
  }
}

/// Fresh empty directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("evtexture_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace evtexture::testing
