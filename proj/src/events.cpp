#include "evtexture/events.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "evtexture/resample.hpp"

namespace evtexture {

void EventStream::validate() const {
  if (width <= 0 || height <= 0) throw InvalidInput("EventStream: non-positive resolution");
  double prev = t_start;
  for (const Event& e : events) {
    if (e.x < 0 || e.x >= width || e.y < 0 || e.y >= height) {
      throw InvalidInput("EventStream: event at (" + std::to_string(e.x) + ", " +
                         std::to_string(e.y) + ") outside sensor");
    }
    if (e.p != 1 && e.p != -1) throw InvalidInput("EventStream: polarity must be +1 or -1");
    if (!std::isfinite(e.t) || e.t < prev || e.t > t_end) {
      throw InvalidInput("EventStream: timestamps unsorted or outside [t_start, t_end]");
    }
    prev = e.t;
  }
}

void SimulatorConfig::validate() const {
  if (!(contrast_mean > 0.0)) throw InvalidInput("SimulatorConfig: contrast_mean must be > 0");
  if (!(contrast_std >= 0.0)) throw InvalidInput("SimulatorConfig: contrast_std must be >= 0");
  if (interp_steps < 1) throw InvalidInput("SimulatorConfig: interp_steps must be >= 1");
  if (!(log_eps > 0.0)) throw InvalidInput("SimulatorConfig: log_eps must be > 0");
}

Eigen::MatrixXd log_intensity(const Image& frame, double log_eps) {
  Eigen::MatrixXd luma;
  if (frame.channels() == 1) {
    luma = frame.plane(0).cast<double>();
  } else if (frame.channels() == 3) {
    luma = 0.299 * frame.plane(0).cast<double>() + 0.587 * frame.plane(1).cast<double>() +
           0.114 * frame.plane(2).cast<double>();
  } else {
    throw InvalidInput("log_intensity: expected 1 or 3 channels, got " +
                       std::to_string(frame.channels()));
  }
  return (luma.array() + log_eps).log().matrix();
}

Eigen::MatrixXd sample_thresholds(int height, int width, const SimulatorConfig& cfg) {
  Eigen::MatrixXd c = Eigen::MatrixXd::Constant(height, width, cfg.contrast_mean);
  if (cfg.contrast_std > 0.0) {
    std::mt19937_64 rng(cfg.rng_seed);
    std::normal_distribution<double> noise(0.0, cfg.contrast_std);
    for (int y = 0; y < height; ++y) {
      for (int x = 0; x < width; ++x) c(y, x) += noise(rng);
    }
  }
  return c.cwiseMax(kMinContrastThreshold);
}

EventStream simulate_events(const FrameSequence& frames, const SimulatorConfig& cfg) {
  cfg.validate();
  if (frames.size() < 2) throw InvalidInput("simulate_events: need at least 2 frames");
  if (!(frames.fps > 0.0)) throw InvalidInput("simulate_events: fps must be positive");
  const int h = frames[0].height();
  const int w = frames[0].width();
  for (const Image& f : frames.frames) {
    if (f.height() != h || f.width() != w || f.channels() != frames[0].channels()) {
      throw InvalidInput("simulate_events: frames differ in shape");
    }
    if (!f.all_finite()) throw InvalidInput("simulate_events: non-finite pixel value");
  }

  const Eigen::MatrixXd threshold = sample_thresholds(h, w, cfg);
  const double dt = 1.0 / frames.fps;

  EventStream out;
  out.width = w;
  out.height = h;
  out.t_start = 0.0;
  out.t_end = (frames.size() - 1) * dt;

  Eigen::MatrixXd current = log_intensity(frames[0], cfg.log_eps);
  Eigen::MatrixXd reference = current;
  const int steps = cfg.interp_steps;

  for (int k = 0; k + 1 < frames.size(); ++k) {
    const Eigen::MatrixXd next = log_intensity(frames[k + 1], cfg.log_eps);
    const double t0 = k * dt;
    std::vector<Event> interval;
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        const double la = current(y, x);
        const double lb = next(y, x);
        if (la == lb) continue;
        const double c = threshold(y, x);
        double& ref = reference(y, x);
        for (int s = 0; s < steps; ++s) {
          const double a = la + (lb - la) * s / steps;
          const double b = la + (lb - la) * (s + 1) / steps;
          const double ta = t0 + dt * s / steps;
          const double tb = s + 1 == steps ? (k + 1) * dt : t0 + dt * (s + 1) / steps;
          const int p = b > a ? 1 : -1;
          while (p * (b - ref) >= c - kCrossingTolerance) {
            ref += p * c;
            double frac = (ref - a) / (b - a);
            frac = std::clamp(frac, 0.0, 1.0);
            interval.push_back({x, y, ta + frac * (tb - ta), p});
          }
        }
      }
    }
    std::stable_sort(interval.begin(), interval.end(),
                     [](const Event& l, const Event& r) { return l.t < r.t; });
    out.events.insert(out.events.end(), interval.begin(), interval.end());
    current = next;
  }
  return out;
}

VoxelGrid voxelize(const EventStream& stream, int bins) {
  if (stream.empty()) return voxelize_window(stream, bins, 0.0, 0.0);
  const double t0 = stream.events.front().t;
  const double tn = stream.events.back().t;
  if (tn <= t0 && stream.size() > 1) {
    throw DegenerateStream("voxelize: all " + std::to_string(stream.size()) +
                           " events share one timestamp");
  }
  return voxelize_window(stream, bins, t0, tn);
}

VoxelGrid voxelize_window(const EventStream& stream, int bins, double t0, double tn) {
  if (bins < 2) throw InvalidInput("voxelize: need at least 2 bins");
  VoxelGrid grid;
  grid.bins = Tensor<double>::zeros(bins, stream.height, stream.width);
  if (stream.empty()) return grid;

  const double span = tn - t0;
  const double to_bins = span > 0.0 ? (bins - 1) / span : 0.0;
  for (const Event& e : stream.events) {
    if (e.x < 0 || e.x >= stream.width || e.y < 0 || e.y >= stream.height) {
      throw InvalidInput("voxelize: event outside sensor");
    }
    const double u = std::clamp((e.t - t0) * to_bins, 0.0, static_cast<double>(bins - 1));
    const int lo = std::max(0, static_cast<int>(std::floor(u)));
    const int hi = std::min(bins - 1, lo + 1);
    for (int i = lo; i <= hi; ++i) grid.bins(i, e.y, e.x) += e.p * temporal_kernel(i - u);
  }
  return grid;
}

double percentile_linear(std::vector<double> values, double q) {
  if (values.empty()) throw InvalidInput("percentile_linear: no values");
  std::sort(values.begin(), values.end());
  const double pos = q / 100.0 * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return values[lo] + frac * (values[hi] - values[lo]);
}

VoxelGrid normalize_voxel(const VoxelGrid& grid) {
  if (grid.normalized) throw InvalidInput("normalize_voxel: grid already normalized");
  VoxelGrid out = grid;
  out.normalized = true;
  std::vector<double> magnitudes;
  const auto& m = grid.bins.matrix();
  for (Eigen::Index i = 0; i < m.size(); ++i) {
    if (m.data()[i] != 0.0) magnitudes.push_back(std::abs(m.data()[i]));
  }
  if (magnitudes.empty()) {
    out.eta = 0.0;
    return out;
  }
  const double eta = percentile_linear(std::move(magnitudes), 98.0);
  out.eta = eta;
  out.bins.matrix() = m.cwiseMax(-eta).cwiseMin(eta) / eta;
  return out;
}

VoxelGrid downsample_voxel(const VoxelGrid& grid, int scale) {
  VoxelGrid out;
  out.normalized = grid.normalized;
  out.eta = grid.eta;
  out.bins = downsample_bicubic(grid.bins, scale);
  if (grid.normalized) out.bins.matrix() = out.bins.matrix().cwiseMax(-1.0).cwiseMin(1.0);
  return out;
}

std::vector<EventStream> split_at(const EventStream& stream, std::span<const double> timestamps,
                                  std::size_t* dropped) {
  if (timestamps.size() < 2) throw InvalidInput("split_at: need at least 2 timestamps");
  const std::size_t intervals = timestamps.size() - 1;
  std::vector<EventStream> out(intervals);
  for (std::size_t i = 0; i < intervals; ++i) {
    if (!(timestamps[i] < timestamps[i + 1])) {
      throw InvalidInput("split_at: timestamps must strictly increase");
    }
    out[i].width = stream.width;
    out[i].height = stream.height;
    out[i].t_start = timestamps[i];
    out[i].t_end = timestamps[i + 1];
  }
  std::size_t lost = 0;
  for (const Event& e : stream.events) {
    if (e.t < timestamps.front() || e.t > timestamps.back()) {
      ++lost;
      continue;
    }
    // index of the last boundary <= t, with the final boundary folded into the
    // last interval
    const auto it = std::upper_bound(timestamps.begin(), timestamps.end(), e.t);
    std::size_t idx = static_cast<std::size_t>(it - timestamps.begin()) - 1;
    idx = std::min(idx, intervals - 1);
    out[idx].events.push_back(e);
  }
  if (dropped != nullptr) *dropped = lost;
  return out;
}

EventStream flip_events(const EventStream& stream, bool horizontal) {
  EventStream out = stream;
  for (Event& e : out.events) {
    if (horizontal) {
      e.x = stream.width - 1 - e.x;
    } else {
      e.y = stream.height - 1 - e.y;
    }
  }
  return out;
}

EventStream negate_polarity(const EventStream& stream) {
  EventStream out = stream;
  for (Event& e : out.events) e.p = -e.p;
  return out;
}

}  // namespace evtexture
