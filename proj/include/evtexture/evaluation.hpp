#pragma once

#include <limits>
#include <string>
#include <vector>

#include "json.hpp"

#include "evtexture/tensor.hpp"

namespace evtexture {

enum class ChannelMode { kY, kRGB };

std::string to_string(ChannelMode mode);
ChannelMode channel_mode_from_string(const std::string& name);

inline constexpr double kPsnrIdentical = std::numeric_limits<double>::infinity();

/// BT.601 luma with the 16..235 offset, on [0, 1] inputs, in [0, 1] units.
Eigen::MatrixXd rgb_to_y(const Image& image);

/// Peak-signal-to-noise ratio in dB with peak 1. Y mode converts both images
/// to luma first. `border` pixels are dropped from each side. Identical
/// inputs return +inf.
double psnr(const Image& pred, const Image& gt, ChannelMode mode = ChannelMode::kY, int border = 0);

/// Single-scale SSIM with an 11x11 Gaussian window (sigma 1.5), averaged over
/// the valid region and, in RGB mode, over channels.
double ssim(const Image& pred, const Image& gt, ChannelMode mode = ChannelMode::kY, int border = 0);

struct FrameMetric {
  double psnr = 0.0;
  double ssim = 0.0;
};

struct MetricReport {
  std::vector<FrameMetric> per_frame;
  FrameMetric clip_mean;
  ChannelMode channel_mode = ChannelMode::kY;
  int border_crop = 0;
};

MetricReport evaluate_sequence(const FrameSequence& pred, const FrameSequence& gt,
                               ChannelMode mode = ChannelMode::kY, int border = 0);

enum class TextureLevel { kEasy, kMedium, kHard };

std::string to_string(TextureLevel level);

struct TextureReport {
  double magnitude = 0.0;
  std::vector<double> per_frame_contrast;  // RMS of I - blur(I), before alpha
  TextureLevel level = TextureLevel::kEasy;
  bool clamped = false;
};

struct TextureOptions {
  double alpha = 10.0;
  int ksize = 5;
  double sigma = 1.5;
  /// Single-clip level boundaries (easy below the first, hard at or above the
  /// second). Corpus-relative bucketing uses bucket_by_magnitude instead.
  double medium_from = 0.24;
  double hard_from = 0.405;
};

/// Alpha times the mean over frames of the RMS difference between each
/// frame's luma and its Gaussian blur, clamped to [0, 1].
TextureReport texture_magnitude(const FrameSequence& frames, const TextureOptions& opts = {});

/// Corpus-relative levels: after an ascending sort the lowest floor(n/2) are
/// easy, the highest round(n/5) hard, the rest medium. Ties keep input order.
std::vector<TextureLevel> bucket_by_magnitude(const std::vector<double>& magnitudes);

/// Row t of the result is column `column` of frame t: a 3 x T x H image.
Image temporal_profile(const FrameSequence& frames, int column);

/// {clip, psnr, ssim, per_frame, texture_magnitude, level}. Infinite PSNR is
/// written as the string "inf"; absent texture fields are null.
nlohmann::json report_json(const std::string& clip, const MetricReport& metrics,
                           const TextureReport* texture = nullptr);
nlohmann::json texture_report_json(const std::string& clip, const TextureReport& texture);

/// Checks a report object against the schema above. Returns an empty string
/// when valid, otherwise the first problem found.
std::string validate_report_json(const nlohmann::json& report);

}  // namespace evtexture
