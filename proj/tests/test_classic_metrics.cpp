#include <gtest/gtest.h>

#include <complex>
#include <numbers>

#include "support.hpp"

namespace {

using namespace stabilitykit;
using metrics::Band;
using sk_test::gray_frame;

constexpr double kPi = std::numbers::pi;

std::vector<double> sinusoid(std::size_t m, double bin, double amp = 1.0, double phase = 0.3) {
  std::vector<double> v(m);
  for (std::size_t t = 0; t < m; ++t) v[t] = amp * std::sin(2 * kPi * bin * t / m + phase);
  return v;
}

// Naive DFT oracle for the band ratio.
double oracle_ratio(const std::vector<double>& x, std::size_t lo, std::size_t hi) {
  const std::size_t m = x.size();
  double in = 0, all = 0;
  for (std::size_t k = 1; k <= m / 2; ++k) {
    double re = 0, im = 0;
    for (std::size_t t = 0; t < m; ++t) {
      re += x[t] * std::cos(2 * kPi * k * t / m);
      im -= x[t] * std::sin(2 * kPi * k * t / m);
    }
    all += re * re + im * im;
    if (k >= lo && k <= hi) in += re * re + im * im;
  }
  return all == 0 ? 1.0 : in / all;
}

TEST(Psnr, IdenticalPlanesHitTheCap) {
  const Plane p(20, 20, 42.0f);
  EXPECT_DOUBLE_EQ(metrics::psnr(p, p), 100.0);
}

TEST(Psnr, UnitOffsetAndFullRange) {
  EXPECT_NEAR(metrics::psnr(Plane(20, 20, 10.0f), Plane(20, 20, 11.0f)), 10 * std::log10(65025.0), 1e-9);
  EXPECT_NEAR(metrics::psnr(Plane(20, 20, 10.0f), Plane(20, 20, 11.0f)), 48.1308, 1e-4);
  EXPECT_NEAR(metrics::psnr(Plane(20, 20, 0.0f), Plane(20, 20, 255.0f)), 0.0, 1e-12);
}

TEST(Psnr, SymmetricAndShapeChecked) {
  Rng r(1);
  Plane a(16, 16), b(16, 16);
  for (auto& v : a.data) v = static_cast<float>(r.uniform(0, 255));
  for (auto& v : b.data) v = static_cast<float>(r.uniform(0, 255));
  EXPECT_DOUBLE_EQ(metrics::psnr(a, b), metrics::psnr(b, a));
  EXPECT_THROW(metrics::psnr(Plane(16, 16), Plane(16, 17)), DimensionMismatch);
}

TEST(Itf, StaticVideoIsCapped) {
  std::vector<Frame> f(10, gray_frame(16, 16, 77));
  const auto r = metrics::itf(FrameSequence(f, 30));
  EXPECT_DOUBLE_EQ(r.score_db, 100.0);
  EXPECT_EQ(r.per_pair_db.size(), 9u);
}

TEST(Itf, MeanOfPairs) {
  const auto r = metrics::itf(
      FrameSequence({gray_frame(16, 16, 50), gray_frame(16, 16, 50), gray_frame(16, 16, 51)}, 30));
  ASSERT_EQ(r.per_pair_db.size(), 2u);
  EXPECT_NEAR(r.score_db, 74.0654, 1e-3);
  EXPECT_NEAR(r.score_db, 0.5 * (r.per_pair_db[0] + r.per_pair_db[1]), 1e-12);
}

TEST(Itf, SingleFrameAndReversal) {
  EXPECT_THROW(metrics::itf(FrameSequence({gray_frame(16, 16, 1)}, 30)), InsufficientFrames);
  Rng r(3);
  std::vector<Frame> fwd;
  for (int k = 0; k < 5; ++k) {
    std::vector<std::uint8_t> px(16 * 16 * 3);
    for (auto& p : px) p = static_cast<std::uint8_t>(r.uniform_int(0, 255));
    fwd.emplace_back(16, 16, px);
  }
  auto rev = fwd;
  std::reverse(rev.begin(), rev.end());
  EXPECT_NEAR(metrics::itf(FrameSequence(fwd, 30)).score_db, metrics::itf(FrameSequence(rev, 30)).score_db, 1e-12);
}

TEST(Itf, MoreJitterLowerItf) {
  const auto base = synth::gen_base_image(160, 160, 4);
  double prev = 1e9;
  for (double amp : {0.0, 2.0, 6.0}) {
    synth::ShakeSpec s;
    s.length = 16;
    if (amp > 0) s.components.push_back({amp * std::sqrt(2.0), 7, 0.0, synth::Axis::kX});
    const auto seq = synth::render_shaky(base, synth::gen_trajectory(s, 1), 96);
    const double v = metrics::itf(seq).score_db;
    EXPECT_LT(v, prev) << amp;
    prev = v;
  }
}

TEST(FreqRatio, ZeroPathIsOne) {
  EXPECT_DOUBLE_EQ(metrics::freq_energy_ratio(std::vector<double>(64, 0.0), {}), 1.0);
  EXPECT_DOUBLE_EQ(metrics::freq_energy_ratio(std::vector<double>(64, 3.0), {}), 1.0);
}

TEST(FreqRatio, InBandAndOutOfBandSinusoids) {
  EXPECT_NEAR(metrics::freq_energy_ratio(sinusoid(64, 3), Band{1, 5}), 1.0, 1e-12);
  EXPECT_NEAR(metrics::freq_energy_ratio(sinusoid(64, 20), Band{1, 5}), 0.0, 1e-9);
}

TEST(FreqRatio, MatchesNaiveDftOracle) {
  Rng r(6);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t m = static_cast<std::size_t>(r.uniform_int(16, 90));
    std::vector<double> x(m);
    for (auto& v : x) v = r.normal();
    const std::size_t lo = static_cast<std::size_t>(r.uniform_int(1, 4));
    const std::size_t hi = lo + static_cast<std::size_t>(r.uniform_int(0, 6));
    EXPECT_NEAR(metrics::freq_energy_ratio(x, {lo, hi}), oracle_ratio(x, lo, hi), 1e-10);
  }
}

TEST(FreqRatio, BoundedAndDecreasingAsFrequencyLeavesBand) {
  // Integer bins are exact. Off-bin tones leak, so compare tones sharing the
  // same fractional offset, up to a quarter of the length where the leakage
  // of the mirrored component starts to grow again.
  for (double f = 1; f <= 32; f += 1) {
    const double v = metrics::freq_energy_ratio(sinusoid(64, f), Band{1, 5});
    EXPECT_NEAR(v, f <= 5 ? 1.0 : 0.0, 1e-9) << f;
  }
  for (double frac : {0.25, 0.5, 0.75}) {
    double prev = 2;
    for (double f = 5 + frac; f <= 16; f += 1) {
      const double v = metrics::freq_energy_ratio(sinusoid(64, f, 1.0, 0.0), Band{1, 5});
      EXPECT_GE(v, 0.0);
      EXPECT_LE(v, 1.0);
      EXPECT_LE(v, prev + 1e-12) << f;
      prev = v;
    }
  }
}

TEST(FreqRatio, ShortPathAndBadBand) {
  EXPECT_THROW(metrics::freq_energy_ratio(std::vector<double>(15, 1.0), {}), InsufficientFrames);
  EXPECT_THROW(metrics::freq_energy_ratio(std::vector<double>(16, 1.0), Band{0, 5}), ConfigError);
  EXPECT_THROW(metrics::freq_energy_ratio(std::vector<double>(16, 1.0), Band{4, 3}), ConfigError);
}

Trajectory traj_x(std::vector<double> x) {
  Trajectory t = Trajectory::zeros(x.size());
  t.x = std::move(x);
  return t;
}

TEST(StabilityScore, Examples) {
  EXPECT_DOUBLE_EQ(metrics::stability_score(Trajectory::zeros(64)).score, 1.0);
  const auto pan = metrics::stability_score(traj_x(sinusoid(64, 2, 5)));
  EXPECT_NEAR(pan.score, 1.0, 1e-12);
  EXPECT_DOUBLE_EQ(pan.components.y, 1.0);
  EXPECT_DOUBLE_EQ(pan.components.theta, 1.0);
  EXPECT_NEAR(metrics::stability_score(traj_x(sinusoid(64, 25, 2))).score, 0.0, 1e-9);
}

TEST(StabilityScore, MinOfComponentsAndMeanOption) {
  Trajectory t = Trajectory::zeros(64);
  t.x = sinusoid(64, 2);
  auto y = sinusoid(64, 2);
  const auto j = sinusoid(64, 20);
  for (std::size_t k = 0; k < 64; ++k) y[k] += j[k];
  t.y = y;
  const auto r = metrics::stability_score(t);
  EXPECT_NEAR(r.components.y, 0.5, 1e-9);
  EXPECT_DOUBLE_EQ(r.score, std::min({r.components.x, r.components.y, r.components.theta}));
  metrics::StabilityOptions o;
  o.combine = metrics::Combine::kMean;
  EXPECT_NEAR(metrics::stability_score(t, o).score, (1 + 0.5 + 1) / 3.0, 1e-9);
}

TEST(StabilityScore, ScaleInvariant) {
  Rng r(2);
  Trajectory t = Trajectory::zeros(48);
  for (auto* p : {&t.x, &t.y, &t.theta})
    for (auto& v : *p) v = r.normal();
  Trajectory s = t;
  for (auto* p : {&s.x, &s.y, &s.theta})
    for (auto& v : *p) v *= 37.5;
  EXPECT_NEAR(metrics::stability_score(t).score, metrics::stability_score(s).score, 1e-12);
}

TEST(StabilityScore, ShortTrajectory) {
  EXPECT_THROW(metrics::stability_score(Trajectory::zeros(15)), InsufficientFrames);
}

}  // namespace
