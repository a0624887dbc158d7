#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "evtexture/tensor.hpp"

namespace evtexture {

struct Event {
  int x = 0;
  int y = 0;
  double t = 0.0;
  int p = 1;  // +1 brighter, -1 darker

  friend bool operator==(const Event&, const Event&) = default;
};

/// Time-ordered events over a width x height sensor and a [t_start, t_end]
/// window.
struct EventStream {
  std::vector<Event> events;
  int width = 0;
  int height = 0;
  double t_start = 0.0;
  double t_end = 0.0;

  std::size_t size() const { return events.size(); }
  bool empty() const { return events.empty(); }

  /// Throws InvalidInput on out-of-bounds pixels, bad polarity, unsorted or
  /// out-of-window timestamps.
  void validate() const;
};

/// B x H x W temporal histogram of signed event mass.
struct VoxelGrid {
  Tensor<double> bins;
  bool normalized = false;
  double eta = 0.0;  // clip level used by normalize_voxel; 0 when unnormalized

  int bin_count() const { return bins.channels(); }
  int height() const { return bins.height(); }
  int width() const { return bins.width(); }
};

struct SimulatorConfig {
  double contrast_mean = 1.0;
  double contrast_std = 0.1;
  int interp_steps = 8;
  double log_eps = 1e-3;
  std::uint64_t rng_seed = 0;

  void validate() const;
};

/// Lowest contrast threshold any pixel may draw.
inline constexpr double kMinContrastThreshold = 0.01;

/// Log-space slack when testing a threshold crossing, so ramps built to land
/// exactly on k*C survive float32 pixel storage.
inline constexpr double kCrossingTolerance = 1e-6;

/// Per-pixel log intensity used by the simulator: log(luma + log_eps). RGB
/// frames are reduced with Rec.601 luma weights; single-channel frames pass
/// through.
Eigen::MatrixXd log_intensity(const Image& frame, double log_eps);

/// ESIM-style event generation. Frame k sits at time k / fps; between frames
/// the log intensity is linearly interpolated over interp_steps sub-steps and
/// an event is emitted each time it moves a full per-pixel threshold away from
/// the pixel's reference level.
EventStream simulate_events(const FrameSequence& frames, const SimulatorConfig& cfg);

/// Per-pixel thresholds the simulator draws for a given configuration.
Eigen::MatrixXd sample_thresholds(int height, int width, const SimulatorConfig& cfg);

/// Triangular time kernel max(0, 1 - |d|).
inline double temporal_kernel(double distance) {
  const double w = 1.0 - (distance < 0 ? -distance : distance);
  return w > 0.0 ? w : 0.0;
}

/// Bin events into a B-channel grid with the triangular kernel, timestamps
/// rescaled so the first event maps to bin 0 and the last to bin B-1.
VoxelGrid voxelize(const EventStream& stream, int bins);

/// Same kernel with an explicit window: t0 maps to bin 0 and tn to bin B-1.
/// Timestamps outside the window are clamped to its ends.
VoxelGrid voxelize_window(const EventStream& stream, int bins, double t0, double tn);

/// Symmetric clip at the 98th percentile of non-zero magnitudes, then divide,
/// so every entry ends in [-1, 1].
VoxelGrid normalize_voxel(const VoxelGrid& grid);

/// Percentile with linear interpolation between order statistics (q in
/// [0, 100]). `values` is taken by value and sorted.
double percentile_linear(std::vector<double> values, double q);

/// Per-bin bicubic shrink of a voxel grid. Normalized grids are re-clamped to
/// [-1, 1] after resampling because the cubic kernel can overshoot.
VoxelGrid downsample_voxel(const VoxelGrid& grid, int scale);

/// Split a stream at frame timestamps into size()-1 interval streams. Interval
/// i is [t_i, t_{i+1}); the final interval is closed. Events outside the frame
/// span are dropped and counted in `dropped`, when given.
std::vector<EventStream> split_at(const EventStream& stream, std::span<const double> timestamps,
                                  std::size_t* dropped = nullptr);

/// Mirror events left-right (x -> W-1-x) or top-bottom.
EventStream flip_events(const EventStream& stream, bool horizontal);

/// Polarity-negated copy.
EventStream negate_polarity(const EventStream& stream);

}  // namespace evtexture
