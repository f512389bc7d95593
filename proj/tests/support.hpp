#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "stabilitykit/stabilitykit.hpp"

namespace sk_test {

using namespace stabilitykit;

inline std::filesystem::path scratch_dir(const std::string& name) {
  const auto dir = std::filesystem::path(STABILITYKIT_TEST_TMP) / name;
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

inline Frame gray_frame(int w, int h, std::uint8_t v) { return Frame::filled(w, h, v, v, v); }

inline Frame frame_from_fn(int w, int h, auto&& fn) {
  std::vector<std::uint8_t> px(static_cast<std::size_t>(w) * h * 3);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const auto v = static_cast<std::uint8_t>(fn(x, y));
      for (int c = 0; c < 3; ++c) px[(static_cast<std::size_t>(y) * w + x) * 3 + c] = v;
    }
  return Frame(w, h, std::move(px));
}

inline Frame checkerboard(int w, int h, int cell) {
  return frame_from_fn(w, h, [&](int x, int y) { return ((x / cell + y / cell) % 2) ? 230 : 25; });
}

inline Plane plane_from_fn(int w, int h, auto&& fn) {
  Plane p(w, h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) p.data[static_cast<std::size_t>(y) * w + x] = static_cast<float>(fn(x, y));
  return p;
}

// Textured frame pair where the second is the first under a similarity about
// the centre, rendered from a larger procedural base.
inline FrameSequence warped_pair(double dx, double dy, double theta, std::uint64_t seed = 11,
                                 int size = 128) {
  Trajectory t = Trajectory::zeros(2);
  t.x[1] = dx;
  t.y[1] = dy;
  t.theta[1] = theta;
  const auto base = synth::gen_base_image(size + 64, size + 64, seed);
  return synth::render_shaky(base, t, size);
}

struct RoundTripError {
  double rms_x = 0, rms_y = 0, rms_theta = 0;
};

// Renders a noise-free spec and compares the estimated camera path with the
// generating one.
inline RoundTripError round_trip(const synth::ShakeSpec& spec, std::uint64_t seed, int out_size = 128,
                                 int margin = 32) {
  const Trajectory gt = synth::gen_trajectory(spec, seed);
  const int side = out_size + 2 * margin;
  const auto seq = synth::render_shaky(synth::gen_base_image(side, side, derive_seed(seed, 2)), gt, out_size);
  const Trajectory est = motion::estimate_trajectory(seq);
  RoundTripError e;
  const double n = static_cast<double>(gt.length());
  for (std::size_t t = 0; t < gt.length(); ++t) {
    e.rms_x += (est.x[t] - gt.x[t]) * (est.x[t] - gt.x[t]) / n;
    e.rms_y += (est.y[t] - gt.y[t]) * (est.y[t] - gt.y[t]) / n;
    e.rms_theta += (est.theta[t] - gt.theta[t]) * (est.theta[t] - gt.theta[t]) / n;
  }
  e.rms_x = std::sqrt(e.rms_x);
  e.rms_y = std::sqrt(e.rms_y);
  e.rms_theta = std::sqrt(e.rms_theta);
  return e;
}

// Noise-free similarity shake: translation amplitude per axis up to max_px,
// rotation amplitude up to max_rad.
inline synth::ShakeSpec random_similarity_spec(std::uint64_t seed, double max_px = 8.0,
                                               double max_rad = 2.0 * 3.14159265358979323846 / 180.0,
                                               std::size_t length = 64) {
  Rng r(seed);
  synth::ShakeSpec s;
  s.length = length;
  for (auto axis : {synth::Axis::kX, synth::Axis::kY}) {
    const double amp = r.uniform(0, max_px);
    const double split = r.uniform(0, 1);
    s.components.push_back({amp * split, static_cast<double>(r.uniform_int(1, 12)), r.uniform(0, 6.28), axis});
    s.components.push_back({amp * (1 - split), static_cast<double>(r.uniform_int(1, 12)), r.uniform(0, 6.28), axis});
  }
  s.components.push_back({r.uniform(0, max_rad), static_cast<double>(r.uniform_int(1, 12)), r.uniform(0, 6.28),
                          synth::Axis::kTheta});
  return s;
}

}  // namespace sk_test
