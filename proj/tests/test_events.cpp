#include "doctest.h"

#include <cmath>
#include <random>

#include "evtexture/events.hpp"
#include "evtexture/io.hpp"
#include "support.hpp"

using namespace evtexture;
namespace tst = evtexture::testing;

namespace {

FrameSequence constant_frames(int t, int h, int w, float value) {
  FrameSequence seq;
  for (int i = 0; i < t; ++i) seq.frames.push_back(Image::constant(1, h, w, value));
  return seq;
}

// Single-channel 1x1 frames whose log intensities hit the given levels.
FrameSequence log_path(const std::vector<double>& levels, double log_eps) {
  FrameSequence seq;
  for (const double l : levels) {
    seq.frames.push_back(Image::constant(1, 1, 1, static_cast<float>(std::exp(l) - log_eps)));
  }
  return seq;
}

SimulatorConfig fixed_threshold() {
  SimulatorConfig cfg;
  cfg.contrast_std = 0.0;
  return cfg;
}

int count_polarity(const EventStream& s, int p) {
  int n = 0;
  for (const Event& e : s.events) n += e.p == p ? 1 : 0;
  return n;
}

}  // namespace

TEST_SUITE("events") {

TEST_CASE("constant frames produce no events") {
  const EventStream s = simulate_events(constant_frames(5, 8, 8, 0.5f), SimulatorConfig{});
  CHECK(s.empty());
  CHECK(s.t_end == doctest::Approx(4.0 / 25.0));
}

TEST_CASE("a ramp of three thresholds gives three positive events") {
  const auto cfg = fixed_threshold();
  const EventStream s = simulate_events(log_path({std::log(0.04), std::log(0.04) + 3.0}, cfg.log_eps), cfg);
  REQUIRE(s.size() == 3);
  for (const Event& e : s.events) CHECK(e.p == 1);
  const auto oracle = tst::crossing_oracle({std::log(0.04), std::log(0.04) + 3.0}, 1.0);
  CHECK(oracle.positive == 3);
  CHECK(oracle.negative == 0);
}

TEST_CASE("up then down by one and a half thresholds") {
  const auto cfg = fixed_threshold();
  const double base = std::log(0.05);
  const std::vector<double> levels{base, base + 1.5, base};
  const EventStream s = simulate_events(log_path(levels, cfg.log_eps), cfg);
  REQUIRE(s.size() == 2);
  CHECK(s.events[0].p == 1);
  CHECK(s.events[1].p == -1);
  CHECK(s.events[0].t < s.events[1].t);
  const auto oracle = tst::crossing_oracle(levels, 1.0);
  CHECK(oracle.positive == 1);
  CHECK(oracle.negative == 1);
}

TEST_CASE("simulator rejects short or non-finite input") {
  CHECK_THROWS_AS(simulate_events(constant_frames(1, 4, 4, 0.5f), SimulatorConfig{}), InvalidInput);
  FrameSequence bad = constant_frames(3, 4, 4, 0.5f);
  bad[1](0, 2, 2) = std::nanf("");
  CHECK_THROWS_AS(simulate_events(bad, SimulatorConfig{}), InvalidInput);
}

TEST_CASE("simulator is deterministic and time ordered") {
  std::mt19937_64 rng(3);
  FrameSequence seq;
  for (int t = 0; t < 4; ++t) seq.frames.push_back(tst::random_tensor<float>(rng, 3, 12, 12, 0.0, 1.0));
  SimulatorConfig cfg;
  cfg.rng_seed = 11;
  const EventStream a = simulate_events(seq, cfg);
  const EventStream b = simulate_events(seq, cfg);
  CHECK(a.events == b.events);
  CHECK_NOTHROW(a.validate());
  CHECK(a.size() > 0);
}

TEST_CASE("net polarity tracks the log change within one threshold") {
  std::mt19937_64 rng(5);
  FrameSequence seq;
  for (int t = 0; t < 5; ++t) seq.frames.push_back(tst::random_tensor<float>(rng, 1, 6, 6, 0.05, 1.0));
  SimulatorConfig cfg;
  cfg.rng_seed = 2;
  const EventStream s = simulate_events(seq, cfg);
  const Eigen::MatrixXd c = sample_thresholds(6, 6, cfg);
  Eigen::MatrixXd net = Eigen::MatrixXd::Zero(6, 6);
  for (const Event& e : s.events) net(e.y, e.x) += e.p * c(e.y, e.x);
  for (int y = 0; y < 6; ++y) {
    for (int x = 0; x < 6; ++x) {
      const double change = std::log(seq[4](0, y, x) + cfg.log_eps) - std::log(seq[0](0, y, x) + cfg.log_eps);
      CHECK(std::abs(net(y, x) - change) < c(y, x) + 1e-9);
    }
  }
}

TEST_CASE("thresholds are clamped from below") {
  SimulatorConfig cfg;
  cfg.contrast_mean = 0.02;
  cfg.contrast_std = 1.0;
  const Eigen::MatrixXd c = sample_thresholds(20, 20, cfg);
  CHECK(c.minCoeff() >= kMinContrastThreshold);
}

TEST_CASE("voxelize: event at the first timestamp lands in bin 1") {
  EventStream s;
  s.width = 4;
  s.height = 3;
  s.events = {{2, 1, 0.5, 1}};
  s.t_start = s.t_end = 0.5;
  const VoxelGrid g = voxelize(s, 5);
  CHECK(g.bins(0, 1, 2) == 1.0);
  CHECK(g.bins.matrix().cwiseAbs().sum() == 1.0);
  CHECK_FALSE(g.normalized);
}

TEST_CASE("voxelize: midpoint event lands in bin 3") {
  EventStream s;
  s.width = 3;
  s.height = 3;
  s.events = {{0, 0, 0.0, -1}, {1, 1, 0.5, 1}, {2, 2, 1.0, -1}};
  s.t_start = 0.0;
  s.t_end = 1.0;
  const VoxelGrid g = voxelize(s, 5);
  CHECK(g.bins(2, 1, 1) == 1.0);
  CHECK(g.bins(1, 1, 1) == 0.0);
  CHECK(g.bins(3, 1, 1) == 0.0);
  CHECK(g.bins(0, 0, 0) == -1.0);
  CHECK(g.bins(4, 2, 2) == -1.0);
}

TEST_CASE("voxelize matches the per-event oracle") {
  std::mt19937_64 rng(17);
  const EventStream s = tst::random_stream(rng, 100, 9, 7);
  const VoxelGrid g = voxelize(s, 5);
  CHECK(tst::max_abs_diff(g.bins, tst::voxel_oracle(s, 5)) < 1e-9);

  const double t0 = s.events.front().t;
  const double tn = s.events.back().t;
  for (const Event& e : s.events) {
    const double u = (e.t - t0) / (tn - t0) * 4.0;
    double total = 0.0;
    for (int i = 0; i < 5; ++i) total += temporal_kernel(i - u);
    CHECK(std::abs(total - 1.0) < 1e-9);
  }
}

TEST_CASE("kernel partition of unity over random positions") {
  std::mt19937_64 rng(23);
  for (const int bins : {2, 3, 5, 8, 13}) {
    std::uniform_real_distribution<double> d(0.0, bins - 1.0);
    for (int k = 0; k < 200; ++k) {
      const double u = d(rng);
      double total = 0.0;
      for (int i = 0; i < bins; ++i) total += temporal_kernel(i - u);
      CHECK(std::abs(total - 1.0) < 1e-9);
    }
  }
}

TEST_CASE("voxelize is linear in polarity and blind to time shifts") {
  std::mt19937_64 rng(29);
  const EventStream s = tst::random_stream(rng, 80, 6, 6);
  const VoxelGrid g = voxelize(s, 4);
  const VoxelGrid neg = voxelize(negate_polarity(s), 4);
  CHECK((g.bins.matrix() + neg.bins.matrix()).cwiseAbs().maxCoeff() == 0.0);

  EventStream shifted = s;
  for (Event& e : shifted.events) e.t += 0.25;
  shifted.t_start += 0.25;
  shifted.t_end += 0.25;
  CHECK(tst::max_abs_diff(voxelize(shifted, 4).bins, g.bins) < 1e-9);
}

TEST_CASE("voxelize edge cases") {
  EventStream empty;
  empty.width = 5;
  empty.height = 4;
  const VoxelGrid z = voxelize(empty, 5);
  CHECK(z.bin_count() == 5);
  CHECK(z.bins.matrix().isZero(0.0));
  CHECK_FALSE(z.normalized);

  EventStream same;
  same.width = same.height = 2;
  same.events = {{0, 0, 1.0, 1}, {1, 1, 1.0, -1}};
  same.t_start = same.t_end = 1.0;
  CHECK_THROWS_AS(voxelize(same, 5), DegenerateStream);
  CHECK_THROWS_AS(voxelize(empty, 1), InvalidInput);
}

TEST_CASE("normalize: single non-zero entry becomes one") {
  VoxelGrid g;
  g.bins = Tensor<double>::zeros(3, 4, 4);
  g.bins(1, 2, 3) = 4.0;
  const VoxelGrid n = normalize_voxel(g);
  CHECK(n.eta == 4.0);
  CHECK(n.bins(1, 2, 3) == 1.0);
  CHECK(n.bins.matrix().cwiseAbs().sum() == 1.0);
  CHECK(n.normalized);

  g.bins(1, 2, 3) = -4.0;
  CHECK(normalize_voxel(g).bins(1, 2, 3) == -1.0);
}

TEST_CASE("normalize: percentile on an explicit value list") {
  VoxelGrid g;
  g.bins = Tensor<double>::zeros(2, 1, 2);
  g.bins(0, 0, 0) = -6.0;
  g.bins(1, 0, 1) = 2.0;
  const VoxelGrid n = normalize_voxel(g);
  // |V| = {2, 6}; linear percentile at 98 -> 2 + 0.98 * 4.
  CHECK(n.eta == doctest::Approx(5.92).epsilon(1e-12));
  CHECK(n.eta >= 2.0);
  CHECK(n.eta <= 6.0);
  CHECK(n.bins(0, 0, 0) == -1.0);
  CHECK(n.bins(1, 0, 1) == doctest::Approx(2.0 / 5.92));
}

TEST_CASE("normalize: zeros stay zero, range holds, idempotent") {
  VoxelGrid zero;
  zero.bins = Tensor<double>::zeros(2, 3, 3);
  const VoxelGrid nz = normalize_voxel(zero);
  CHECK(nz.normalized);
  CHECK(nz.bins.matrix().isZero(0.0));

  std::mt19937_64 rng(31);
  const VoxelGrid n = normalize_voxel(voxelize(tst::random_stream(rng, 400, 8, 8), 5));
  CHECK(n.bins.matrix().maxCoeff() <= 1.0);
  CHECK(n.bins.matrix().minCoeff() >= -1.0);

  VoxelGrid again = n;
  again.normalized = false;
  const VoxelGrid twice = normalize_voxel(again);
  CHECK(twice.bins.matrix().maxCoeff() <= 1.0);
  CHECK(twice.bins.matrix().minCoeff() >= -1.0);
}

TEST_CASE("percentile uses linear interpolation") {
  CHECK(percentile_linear({1.0, 2.0, 3.0, 4.0, 5.0}, 50.0) == 3.0);
  CHECK(percentile_linear({1.0, 2.0}, 25.0) == doctest::Approx(1.25));
  CHECK(percentile_linear({7.0}, 98.0) == 7.0);
}

TEST_CASE("split_at assigns each event to one half-open interval") {
  EventStream s;
  s.width = s.height = 2;
  s.events = {{0, 0, 0.0, 1}, {0, 0, 0.1, 1}, {1, 0, 0.2, -1}, {1, 1, 0.3, 1}, {0, 1, 0.4, 1}};
  s.t_start = 0.0;
  s.t_end = 0.4;
  const std::vector<double> ts{0.0, 0.2, 0.4};
  std::size_t dropped = 0;
  const auto parts = split_at(s, ts, &dropped);
  REQUIRE(parts.size() == 2);
  CHECK(parts[0].size() == 2);
  CHECK(parts[1].size() == 3);  // 0.2, 0.3 and the closing 0.4
  CHECK(dropped == 0);
}

TEST_CASE("downsampled normalized voxels stay in range") {
  std::mt19937_64 rng(37);
  const VoxelGrid n = normalize_voxel(voxelize(tst::random_stream(rng, 300, 16, 16), 3));
  const VoxelGrid d = downsample_voxel(n, 4);
  CHECK(d.height() == 4);
  CHECK(d.width() == 4);
  CHECK(d.bin_count() == 3);
  CHECK(d.bins.matrix().cwiseAbs().maxCoeff() <= 1.0);
}

TEST_CASE("event files round trip") {
  std::mt19937_64 rng(41);
  const EventStream s = tst::random_stream(rng, 50, 10, 6);
  const auto dir = tst::scratch_dir("events_io");
  write_events_binary(dir / "e.evt1", s);
  write_events_csv(dir / "e.csv", s);
  const EventStream b = read_events_binary(dir / "e.evt1");
  const EventStream c = read_events_csv(dir / "e.csv", 10, 6);
  CHECK(b.events == s.events);
  CHECK(b.width == 10);
  CHECK(b.height == 6);
  REQUIRE(c.size() == s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    CHECK(c.events[i].x == s.events[i].x);
    CHECK(c.events[i].t == doctest::Approx(s.events[i].t).epsilon(1e-12));
  }
  CHECK(std::filesystem::file_size(dir / "e.evt1") == kEventHeaderBytes + 50 * kEventRecordBytes);
  CHECK_THROWS_AS(read_events_binary(dir / "missing.evt1"), IoError);
}

TEST_CASE("voxel files round trip through float32") {
  std::mt19937_64 rng(43);
  const VoxelGrid n = normalize_voxel(voxelize(tst::random_stream(rng, 60, 5, 4), 5));
  const auto dir = tst::scratch_dir("voxel_io");
  write_voxel(dir / "v.npy", n);
  const VoxelGrid r = read_voxel(dir / "v.npy");
  CHECK(r.normalized);
  CHECK(r.eta == doctest::Approx(n.eta));
  CHECK(r.bin_count() == 5);
  CHECK(tst::max_abs_diff(r.bins, n.bins) < 1e-6);
}

}  // TEST_SUITE
