#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "evtexture/events.hpp"

namespace evtexture {

/// One clip with everything training and evaluation need.
struct ClipRecord {
  std::string name;
  int scale = 4;
  FrameSequence hr_frames;
  FrameSequence lr_frames;
  std::vector<EventStream> hr_events;  // one stream per interval
  std::vector<VoxelGrid> lr_voxels;    // normalized, LR resolution
  double texture_magnitude = 0.0;

  int length() const { return lr_frames.size(); }
  /// Throws InvalidInput when the shape invariants do not hold.
  void validate() const;
};

enum class PatternKind { kCheckerboard, kPerlin, kMovingText };

std::string to_string(PatternKind kind);
PatternKind pattern_from_string(const std::string& name);

struct SynthOptions {
  PatternKind kind = PatternKind::kCheckerboard;
  int frames = 5;
  int height = 128;  // HR size
  int width = 128;
  double vx = 1.0;  // px per frame, HR pixels
  double vy = 0.0;
  int scale = 4;
  int bins = 5;
  double fps = 25.0;
  std::uint64_t seed = 0;
  SimulatorConfig simulator;

  void validate() const;
};

/// Per-frame antialiased bicubic shrink (same operator as voxel downsampling).
FrameSequence make_lr(const FrameSequence& hr, int scale);

/// HR pattern translating at constant velocity, its events, LR frames and LR
/// voxel grids. HR frames are quantized to 8 bits so a PNG round trip is
/// lossless.
ClipRecord synth_clip(const SynthOptions& opts);

/// Builds the interval voxels for a clip from its full HR event stream:
/// split at k / fps, voxelize, normalize, shrink to LR.
std::vector<VoxelGrid> interval_voxels(const EventStream& stream, int frames, double fps,
                                       int bins, int scale, std::vector<EventStream>* intervals);

/// Writes clip/hr/%06d.png, clip/events.evt1 and clip/meta.json.
void write_clip(const ClipRecord& clip, const std::filesystem::path& dir, int bins);

/// Frames from `frame_dir`, events from `event_file`; frame k is at time
/// k / fps. Missing interval events give a zero voxel and a warning.
ClipRecord ingest_clip(const std::filesystem::path& frame_dir,
                       const std::filesystem::path& event_file, int scale, int bins,
                       double fps = 25.0);

/// Reads a directory in the write_clip layout.
ClipRecord ingest_clip_dir(const std::filesystem::path& dir);

/// A fixed mix of checkerboard and perlin clips with seed-derived velocities.
std::vector<ClipRecord> synth_corpus(int count, const SynthOptions& base, std::uint64_t seed,
                                     const std::vector<PatternKind>& kinds);

}  // namespace evtexture
