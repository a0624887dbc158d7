#include "doctest.h"

#include <cmath>
#include <random>

#include "evtexture/data.hpp"
#include "evtexture/evaluation.hpp"
#include "evtexture/io.hpp"
#include "evtexture/resample.hpp"
#include "support.hpp"

using namespace evtexture;
namespace tst = evtexture::testing;

namespace {

SynthOptions small_synth(PatternKind kind, double vx, double vy) {
  SynthOptions o;
  o.kind = kind;
  o.frames = 4;
  o.height = 64;
  o.width = 64;
  o.vx = vx;
  o.vy = vy;
  o.seed = 12;
  return o;
}

}  // namespace

TEST_SUITE("data") {

TEST_CASE("make_lr keeps constants and shrinks by the scale") {
  FrameSequence hr;
  hr.frames.push_back(Image::constant(3, 128, 128, 0.42f));
  const FrameSequence lr = make_lr(hr, 4);
  REQUIRE(lr.size() == 1);
  CHECK(lr[0].height() == 32);
  CHECK(lr[0].width() == 32);
  CHECK((lr[0].matrix().array() - 0.42f).abs().maxCoeff() < 1e-6f);

  FrameSequence odd;
  odd.frames.push_back(Image::zeros(3, 30, 32));
  CHECK_THROWS_AS(make_lr(odd, 4), InvalidInput);
}

TEST_CASE("make_lr on a ramp") {
  const int w = 64;
  FrameSequence hr;
  Image ramp(1, 8, w);
  for (int x = 0; x < w; ++x) ramp.plane(0).col(x).setConstant(static_cast<float>(x) / (w - 1));
  hr.frames.push_back(ramp);
  const Image lr = make_lr(hr, 4)[0];
  // The two central LR columns straddle the ramp midpoint symmetrically.
  const double mid = 0.5 * (lr(0, 1, 7) + lr(0, 1, 8));
  CHECK(std::abs(mid - 0.5) < 1e-3);
  // Away from the borders each LR column is the ramp at its footprint centre.
  for (int j = 2; j < 14; ++j) {
    const double centre = (j + 0.5) * 4 - 0.5;
    CHECK(std::abs(lr(0, 1, j) - centre / (w - 1)) < 1e-3);
  }
}

TEST_CASE("frames and voxel bins share one shrink operator") {
  std::mt19937_64 rng(1);
  VoxelGrid g;
  g.bins = tst::random_tensor<double>(rng, 3, 16, 16);
  const VoxelGrid d = downsample_voxel(g, 4);
  const Eigen::MatrixXd m = bicubic_matrix(16, 4);
  const Tensor<double> ref = separable_apply<double>(g.bins, m, m);
  CHECK(tst::max_abs_diff(d.bins, ref) < 1e-12);

  FrameSequence hr;
  hr.frames.push_back(g.bins.cast<float>());
  const Image lr = make_lr(hr, 4)[0];
  CHECK((lr.matrix().cast<double>() - ref.matrix()).cwiseAbs().maxCoeff() < 1e-5);
}

TEST_CASE("synth_clip shape contract") {
  SynthOptions o;
  o.frames = 5;
  o.seed = 3;
  const ClipRecord c = synth_clip(o);
  CHECK(c.length() == 5);
  CHECK(c.hr_frames[0].height() == 128);
  CHECK(c.lr_frames[0].height() == 32);
  CHECK(c.lr_frames[0].width() == 32);
  CHECK(c.lr_voxels.size() == 4);
  CHECK(c.hr_events.size() == 4);
  for (const VoxelGrid& v : c.lr_voxels) {
    CHECK(v.bin_count() == 5);
    CHECK(v.normalized);
    CHECK(v.height() == 32);
    CHECK(v.bins.matrix().cwiseAbs().maxCoeff() <= 1.0);
  }
  CHECK_NOTHROW(c.validate());
}

TEST_CASE("static clips have identical frames and no events") {
  for (const PatternKind kind : {PatternKind::kCheckerboard, PatternKind::kPerlin, PatternKind::kMovingText}) {
    const ClipRecord c = synth_clip(small_synth(kind, 0.0, 0.0));
    for (int t = 1; t < c.length(); ++t) {
      CHECK((c.hr_frames[t].matrix() - c.hr_frames[0].matrix()).isZero(0.0f));
    }
    for (const EventStream& s : c.hr_events) CHECK(s.empty());
    for (const VoxelGrid& v : c.lr_voxels) CHECK(v.bins.matrix().isZero(0.0));
  }
}

TEST_CASE("moving clips produce events") {
  for (const PatternKind kind : {PatternKind::kCheckerboard, PatternKind::kPerlin, PatternKind::kMovingText}) {
    const ClipRecord c = synth_clip(small_synth(kind, 1.0, 1.0));
    std::size_t n = 0;
    for (const EventStream& s : c.hr_events) n += s.size();
    CHECK(n > 100);
    CHECK(c.texture_magnitude > 0.0);
  }
}

TEST_CASE("integer velocity shifts frames exactly") {
  for (const PatternKind kind : {PatternKind::kCheckerboard, PatternKind::kPerlin}) {
    const int vx = 2;
    const int vy = -1;
    const ClipRecord c = synth_clip(small_synth(kind, vx, vy));
    for (int t = 0; t + 1 < c.length(); ++t) {
      const Image& a = c.hr_frames[t];
      const Image& b = c.hr_frames[t + 1];
      for (int ch = 0; ch < 3; ++ch) {
        for (int y = 2; y < 62; ++y) {
          for (int x = 2; x < 62; ++x) CHECK_EQ(b(ch, y, x), a(ch, y - vy, x - vx));
        }
      }
    }
  }
}

TEST_CASE("synth_clip is seed-deterministic") {
  const ClipRecord a = synth_clip(small_synth(PatternKind::kPerlin, 1, 0));
  const ClipRecord b = synth_clip(small_synth(PatternKind::kPerlin, 1, 0));
  CHECK((a.hr_frames[2].matrix() - b.hr_frames[2].matrix()).isZero(0.0f));
  CHECK(a.hr_events[1].events == b.hr_events[1].events);
  SynthOptions other = small_synth(PatternKind::kPerlin, 1, 0);
  other.seed = 13;
  CHECK_FALSE((synth_clip(other).hr_frames[0].matrix() - a.hr_frames[0].matrix()).isZero(0.0f));
}

TEST_CASE("checkerboard clip outscores its blurred clone") {
  const ClipRecord c = synth_clip(small_synth(PatternKind::kCheckerboard, 1, 1));
  FrameSequence blurred = c.hr_frames;
  for (Image& f : blurred.frames) {
    for (int ch = 0; ch < 3; ++ch) f.plane(ch) = gaussian_blur(f.plane(ch).cast<double>(), 5, 1.5).cast<float>();
  }
  CHECK(c.texture_magnitude > texture_magnitude(blurred).magnitude);
  CHECK_FALSE(texture_magnitude(c.hr_frames).clamped);
}

TEST_CASE("synth options are validated") {
  SynthOptions o = small_synth(PatternKind::kCheckerboard, 5.0, 0.0);
  CHECK_THROWS_AS(synth_clip(o), InvalidInput);
  o = small_synth(PatternKind::kCheckerboard, 1.0, 0.0);
  o.height = 60;
  CHECK_THROWS_AS(synth_clip(o), InvalidInput);
  CHECK_THROWS_AS(pattern_from_string("stripes"), InvalidInput);
  CHECK(pattern_from_string("perlin-texture") == PatternKind::kPerlin);
}

TEST_CASE("interval split covers every event once") {
  const ClipRecord c = synth_clip(small_synth(PatternKind::kCheckerboard, 1, 2));
  EventStream all;
  all.width = all.height = 64;
  for (const EventStream& s : c.hr_events) all.events.insert(all.events.end(), s.events.begin(), s.events.end());
  const auto re = split_at(all, std::vector<double>{0.0, 0.04, 0.08, 0.12});
  std::size_t total = 0;
  for (std::size_t i = 0; i < re.size(); ++i) {
    total += re[i].size();
    for (const Event& e : re[i].events) {
      CHECK(e.t >= 0.04 * static_cast<double>(i) - 1e-12);
      if (i + 1 < re.size()) CHECK(e.t < 0.04 * static_cast<double>(i + 1) + 1e-12);
    }
  }
  CHECK(total == all.size());
}

TEST_CASE("write then ingest reproduces the clip") {
  const ClipRecord c = synth_clip(small_synth(PatternKind::kPerlin, -1, 1));
  const auto dir = tst::scratch_dir("roundtrip");
  write_clip(c, dir / "clip", 5);
  const ClipRecord r = ingest_clip_dir(dir / "clip");
  REQUIRE(r.length() == c.length());
  REQUIRE(r.lr_voxels.size() == c.lr_voxels.size());
  for (int t = 0; t < c.length(); ++t) {
    CHECK((r.hr_frames[t].matrix() - c.hr_frames[t].matrix()).isZero(0.0f));
    CHECK((r.lr_frames[t].matrix() - c.lr_frames[t].matrix()).isZero(0.0f));
  }
  for (std::size_t i = 0; i < c.lr_voxels.size(); ++i) {
    CHECK(tst::max_abs_diff(r.lr_voxels[i].bins, c.lr_voxels[i].bins) < 1e-6);
  }
}

TEST_CASE("ingest counts intervals and tolerates missing events") {
  const auto dir = tst::scratch_dir("ingest");
  FrameSequence frames;
  std::mt19937_64 rng(2);
  for (int t = 0; t < 10; ++t) frames.frames.push_back(tst::random_tensor<float>(rng, 3, 16, 16, 0.0, 1.0));
  write_frame_dir(dir / "frames", frames);

  EventStream late;
  late.width = late.height = 16;
  late.events = {{1, 1, 50.0, 1}, {2, 2, 51.0, -1}};
  late.t_start = 50.0;
  late.t_end = 51.0;
  write_events_binary(dir / "late.evt1", late);
  const ClipRecord c = ingest_clip(dir / "frames", dir / "late.evt1", 4, 5);
  CHECK(c.lr_voxels.size() == 9);
  for (const VoxelGrid& v : c.lr_voxels) CHECK(v.bins.matrix().isZero(0.0));

  EventStream inside = simulate_events(read_frame_dir(dir / "frames"), SimulatorConfig{});
  write_events_binary(dir / "inside.evt1", inside);
  const ClipRecord d = ingest_clip(dir / "frames", dir / "inside.evt1", 4, 5);
  CHECK(d.lr_voxels.size() == 9);
  CHECK(d.lr_frames[0].height() == 4);

  CHECK_THROWS_AS(ingest_clip(dir / "frames", dir / "nope.evt1", 4, 5), IoError);
  CHECK_THROWS_AS(ingest_clip(dir / "empty", dir / "late.evt1", 4, 5), IoError);
}

TEST_CASE("corpus mixes kinds with non-zero integer velocities") {
  SynthOptions base = small_synth(PatternKind::kCheckerboard, 0, 0);
  const auto clips = synth_corpus(4, base, 7, {PatternKind::kCheckerboard, PatternKind::kPerlin});
  REQUIRE(clips.size() == 4);
  CHECK(clips[0].name.rfind("checkerboard", 0) == 0);
  CHECK(clips[1].name.rfind("perlin", 0) == 0);
  for (const auto& c : clips) {
    std::size_t n = 0;
    for (const auto& s : c.hr_events) n += s.size();
    CHECK(n > 0);
  }
}

}  // TEST_SUITE
