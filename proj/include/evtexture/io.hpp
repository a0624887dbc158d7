#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "evtexture/events.hpp"
#include "evtexture/tensor.hpp"

namespace evtexture {

namespace fs = std::filesystem;

// Event files.
//
// Binary layout, little-endian:
//   header (16 bytes): "EVT1", uint16 width, uint16 height, uint32 count,
//                      4 reserved zero bytes
//   count records (13 bytes each, packed): uint16 x, uint16 y, float64 t,
//                      int8 p
// The CSV alternative has a header row "x,y,t,p" and one event per line.
// Neither format stores t_start/t_end; readers set them to the first and last
// event timestamps (0 for an empty file).

inline constexpr std::size_t kEventHeaderBytes = 16;
inline constexpr std::size_t kEventRecordBytes = 13;

void write_events_binary(const fs::path& path, const EventStream& stream);
EventStream read_events_binary(const fs::path& path);
void write_events_csv(const fs::path& path, const EventStream& stream);
/// The CSV has no resolution header; it is passed in.
EventStream read_events_csv(const fs::path& path, int width, int height);
/// Dispatch on extension: ".csv" is text, everything else binary.
EventStream read_events(const fs::path& path, int width = 0, int height = 0);

// Voxel grids: NPY v1.0 array "<f4" of shape (B, H, W) plus a JSON sidecar
// at <path>.json holding {"B", "normalized", "eta"}.

void write_voxel(const fs::path& npy_path, const VoxelGrid& grid);
VoxelGrid read_voxel(const fs::path& npy_path);

/// Raw NPY helpers (float32, C order).
void write_npy_f32(const fs::path& path, const std::vector<float>& data,
                   const std::vector<std::size_t>& shape);
std::vector<float> read_npy_f32(const fs::path& path, std::vector<std::size_t>& shape);

// Images: 8-bit PNG, gray or RGB. Reading yields values k/255.

Image read_png(const fs::path& path);
/// Clips to [0, 1] and rounds to 8 bits.
void write_png(const fs::path& path, const Image& image);
/// Sorted *.png files in a directory.
std::vector<fs::path> list_pngs(const fs::path& dir);
FrameSequence read_frame_dir(const fs::path& dir, double fps = 25.0);
/// Writes frames as %06d.png.
void write_frame_dir(const fs::path& dir, const FrameSequence& frames);

/// Value the 8-bit round trip produces for v.
inline float quantize_u8(float v) {
  const float c = v < 0.0f ? 0.0f : (v > 1.0f ? 1.0f : v);
  return static_cast<float>(static_cast<int>(c * 255.0f + 0.5f)) / 255.0f;
}

std::string read_text_file(const fs::path& path);
void write_text_file(const fs::path& path, const std::string& text);

}  // namespace evtexture
