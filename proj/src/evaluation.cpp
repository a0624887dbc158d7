#include "evtexture/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <spdlog/spdlog.h>

#include "evtexture/resample.hpp"

namespace evtexture {

using nlohmann::json;

std::string to_string(ChannelMode mode) { return mode == ChannelMode::kY ? "Y" : "RGB"; }

ChannelMode channel_mode_from_string(const std::string& name) {
  if (name == "Y" || name == "y") return ChannelMode::kY;
  if (name == "RGB" || name == "rgb") return ChannelMode::kRGB;
  throw InvalidInput("unknown channel mode '" + name + "' (expected Y or RGB)");
}

std::string to_string(TextureLevel level) {
  switch (level) {
    case TextureLevel::kEasy: return "easy";
    case TextureLevel::kMedium: return "medium";
    case TextureLevel::kHard: return "hard";
  }
  return "easy";
}

Eigen::MatrixXd rgb_to_y(const Image& image) {
  if (image.channels() != 3) throw InvalidInput("rgb_to_y: expected 3 channels");
  const auto r = image.plane(0).cast<double>();
  const auto g = image.plane(1).cast<double>();
  const auto b = image.plane(2).cast<double>();
  return ((65.481 * r + 128.553 * g + 24.966 * b).array() + 16.0) / 255.0;
}

namespace {

/// Planes to compare: the luma plane in Y mode, otherwise every channel.
std::vector<Eigen::MatrixXd> planes(const Image& image, ChannelMode mode, int border) {
  const int h = image.height() - 2 * border;
  const int w = image.width() - 2 * border;
  if (border < 0 || h <= 0 || w <= 0) {
    throw InvalidInput("border crop " + std::to_string(border) + " leaves nothing of " +
                       image.shape_string());
  }
  std::vector<Eigen::MatrixXd> out;
  if (mode == ChannelMode::kY) {
    out.push_back(rgb_to_y(image).block(border, border, h, w));
  } else {
    for (int c = 0; c < image.channels(); ++c) {
      out.push_back(image.plane(c).cast<double>().block(border, border, h, w));
    }
  }
  return out;
}

Eigen::MatrixXd filter_valid(const Eigen::MatrixXd& x, const Eigen::VectorXd& k) {
  const auto n = k.size();
  const Eigen::Index h = x.rows() - n + 1;
  const Eigen::Index w = x.cols() - n + 1;
  Eigen::MatrixXd tmp(x.rows(), w);
  for (Eigen::Index j = 0; j < w; ++j) tmp.col(j) = x.middleCols(j, n) * k;
  Eigen::MatrixXd out(h, w);
  for (Eigen::Index i = 0; i < h; ++i) out.row(i) = k.transpose() * tmp.middleRows(i, n);
  return out;
}

double ssim_plane(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  constexpr int kWindow = 11;
  if (a.rows() < kWindow || a.cols() < kWindow) {
    throw InvalidInput("ssim: image smaller than the 11x11 window");
  }
  const Eigen::VectorXd k = gaussian_kernel(kWindow, 1.5);
  const double c1 = 0.01 * 0.01;
  const double c2 = 0.03 * 0.03;
  const Eigen::ArrayXXd mu1 = filter_valid(a, k).array();
  const Eigen::ArrayXXd mu2 = filter_valid(b, k).array();
  const Eigen::ArrayXXd s11 = filter_valid(a.cwiseProduct(a), k).array() - mu1 * mu1;
  const Eigen::ArrayXXd s22 = filter_valid(b.cwiseProduct(b), k).array() - mu2 * mu2;
  const Eigen::ArrayXXd s12 = filter_valid(a.cwiseProduct(b), k).array() - mu1 * mu2;
  const Eigen::ArrayXXd map = ((2.0 * mu1 * mu2 + c1) * (2.0 * s12 + c2)) /
                              ((mu1 * mu1 + mu2 * mu2 + c1) * (s11 + s22 + c2));
  return map.mean();
}

}  // namespace

double psnr(const Image& pred, const Image& gt, ChannelMode mode, int border) {
  require_same_shape(pred, gt, "psnr");
  const auto p = planes(pred, mode, border);
  const auto g = planes(gt, mode, border);
  double se = 0.0;
  double count = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    se += (p[i] - g[i]).squaredNorm();
    count += static_cast<double>(p[i].size());
  }
  const double mse = se / count;
  if (mse == 0.0) return kPsnrIdentical;
  return 10.0 * std::log10(1.0 / mse);
}

double ssim(const Image& pred, const Image& gt, ChannelMode mode, int border) {
  require_same_shape(pred, gt, "ssim");
  const auto p = planes(pred, mode, border);
  const auto g = planes(gt, mode, border);
  double total = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) total += ssim_plane(p[i], g[i]);
  return total / static_cast<double>(p.size());
}

MetricReport evaluate_sequence(const FrameSequence& pred, const FrameSequence& gt,
                               ChannelMode mode, int border) {
  if (pred.size() != gt.size()) {
    throw InvalidInput("evaluate: " + std::to_string(pred.size()) + " predicted frames vs " +
                       std::to_string(gt.size()) + " ground-truth frames");
  }
  if (pred.size() == 0) throw InvalidInput("evaluate: empty sequence");
  MetricReport report;
  report.channel_mode = mode;
  report.border_crop = border;
  for (int t = 0; t < pred.size(); ++t) {
    FrameMetric m{psnr(pred[t], gt[t], mode, border), ssim(pred[t], gt[t], mode, border)};
    report.clip_mean.psnr += m.psnr;
    report.clip_mean.ssim += m.ssim;
    report.per_frame.push_back(m);
  }
  report.clip_mean.psnr /= pred.size();
  report.clip_mean.ssim /= pred.size();
  return report;
}

TextureReport texture_magnitude(const FrameSequence& frames, const TextureOptions& opts) {
  if (frames.size() == 0) throw InvalidInput("texture_magnitude: no frames");
  TextureReport report;
  double total = 0.0;
  for (const Image& frame : frames.frames) {
    Eigen::MatrixXd luma;
    if (frame.channels() == 3) {
      luma = 0.299 * frame.plane(0).cast<double>() + 0.587 * frame.plane(1).cast<double>() +
             0.114 * frame.plane(2).cast<double>();
    } else if (frame.channels() == 1) {
      luma = frame.plane(0).cast<double>();
    } else {
      throw InvalidInput("texture_magnitude: frames must have 1 or 3 channels");
    }
    const Eigen::MatrixXd diff = luma - gaussian_blur(luma, opts.ksize, opts.sigma);
    const double rms = std::sqrt(diff.squaredNorm() / static_cast<double>(diff.size()));
    report.per_frame_contrast.push_back(rms);
    total += rms;
  }
  double magnitude = opts.alpha * total / frames.size();
  if (magnitude > 1.0) {
    spdlog::info("texture magnitude {:.4f} clamped to 1", magnitude);
    magnitude = 1.0;
    report.clamped = true;
  }
  report.magnitude = magnitude;
  report.level = magnitude >= opts.hard_from     ? TextureLevel::kHard
                 : magnitude >= opts.medium_from ? TextureLevel::kMedium
                                                 : TextureLevel::kEasy;
  return report;
}

std::vector<TextureLevel> bucket_by_magnitude(const std::vector<double>& magnitudes) {
  const std::size_t n = magnitudes.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return magnitudes[a] < magnitudes[b]; });
  const std::size_t easy = n / 2;
  const auto hard = static_cast<std::size_t>(std::llround(0.2 * static_cast<double>(n)));
  std::vector<TextureLevel> levels(n, TextureLevel::kMedium);
  for (std::size_t rank = 0; rank < n; ++rank) {
    if (rank < easy) {
      levels[order[rank]] = TextureLevel::kEasy;
    } else if (rank >= n - hard) {
      levels[order[rank]] = TextureLevel::kHard;
    }
  }
  return levels;
}

Image temporal_profile(const FrameSequence& frames, int column) {
  if (frames.size() == 0) throw InvalidInput("temporal_profile: no frames");
  const Image& first = frames[0];
  if (column < 0 || column >= first.width()) {
    throw InvalidInput("temporal_profile: column " + std::to_string(column) +
                       " outside [0, " + std::to_string(first.width()) + ")");
  }
  Image out(first.channels(), frames.size(), first.height());
  for (int t = 0; t < frames.size(); ++t) {
    require_same_shape(frames[t], first, "temporal_profile");
    for (int c = 0; c < first.channels(); ++c) {
      out.plane(c).row(t) = frames[t].plane(c).col(column).transpose();
    }
  }
  return out;
}

namespace {

json psnr_value(double v) { return std::isinf(v) ? json("inf") : json(v); }

}  // namespace

json report_json(const std::string& clip, const MetricReport& metrics,
                 const TextureReport* texture) {
  json per_frame = json::array();
  for (const FrameMetric& m : metrics.per_frame) {
    per_frame.push_back({{"psnr", psnr_value(m.psnr)}, {"ssim", m.ssim}});
  }
  json j = {{"clip", clip},
            {"psnr", psnr_value(metrics.clip_mean.psnr)},
            {"ssim", metrics.clip_mean.ssim},
            {"per_frame", per_frame},
            {"channel_mode", to_string(metrics.channel_mode)},
            {"border_crop", metrics.border_crop},
            {"texture_magnitude", nullptr},
            {"level", nullptr}};
  if (texture != nullptr) {
    j["texture_magnitude"] = texture->magnitude;
    j["level"] = to_string(texture->level);
  }
  return j;
}

json texture_report_json(const std::string& clip, const TextureReport& texture) {
  return {{"clip", clip},
          {"psnr", nullptr},
          {"ssim", nullptr},
          {"per_frame", json::array()},
          {"per_frame_contrast", texture.per_frame_contrast},
          {"texture_magnitude", texture.magnitude},
          {"clamped", texture.clamped},
          {"level", to_string(texture.level)}};
}

std::string validate_report_json(const json& report) {
  if (!report.is_object()) return "report is not an object";
  for (const char* key : {"clip", "psnr", "ssim", "per_frame", "texture_magnitude", "level"}) {
    if (!report.contains(key)) return std::string("missing key '") + key + "'";
  }
  const auto psnr_ok = [](const json& v) {
    return v.is_null() || v.is_number() || (v.is_string() && v.get<std::string>() == "inf");
  };
  const auto ssim_ok = [](const json& v) {
    return v.is_null() || (v.is_number() && v.get<double>() >= -1.0 && v.get<double>() <= 1.0);
  };
  if (!report["clip"].is_string()) return "clip must be a string";
  if (!psnr_ok(report["psnr"])) return "psnr must be a number, \"inf\" or null";
  if (!ssim_ok(report["ssim"])) return "ssim must be a number in [-1, 1] or null";
  if (!report["per_frame"].is_array()) return "per_frame must be an array";
  for (const json& f : report["per_frame"]) {
    if (!f.is_object() || !f.contains("psnr") || !f.contains("ssim")) {
      return "per_frame entries need psnr and ssim";
    }
    if (!psnr_ok(f["psnr"]) || !ssim_ok(f["ssim"])) return "per_frame entry out of range";
  }
  const json& tm = report["texture_magnitude"];
  if (!tm.is_null() && !(tm.is_number() && tm.get<double>() >= 0.0 && tm.get<double>() <= 1.0)) {
    return "texture_magnitude must be in [0, 1] or null";
  }
  const json& level = report["level"];
  if (!level.is_null()) {
    if (!level.is_string()) return "level must be a string or null";
    const std::string s = level.get<std::string>();
    if (s != "easy" && s != "medium" && s != "hard") return "level must be easy, medium or hard";
  }
  return {};
}

}  // namespace evtexture
