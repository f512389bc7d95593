#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <string>
#include <vector>

#include "stabilitykit/error.hpp"
#include "stabilitykit/image.hpp"
#include "stabilitykit/motion.hpp"
#include "stabilitykit/rng.hpp"

namespace stabilitykit::synth {

enum class Axis { kX, kY, kTheta };

struct ShakeComponent {
  double amplitude = 0;  // pixels, or radians on the theta axis
  double frequency = 0;  // cycles over the whole trajectory
  double phase = 0;      // radians
  Axis axis = Axis::kX;
};

struct ShakeSpec {
  std::vector<ShakeComponent> components;
  double noise_sigma = 0;  // pixels, x and y only
  std::size_t length = 64;

  void validate() const {
    if (length < 16) throw ConfigError("shake spec length must be >= 16");
    for (const auto& c : components) {
      if (c.amplitude < 0) throw ConfigError("negative shake amplitude");
      if (c.frequency < 0 || c.frequency > length / 2.0)
        throw ConfigError("shake frequency outside [0, length/2]");
    }
    if (noise_sigma < 0) throw ConfigError("negative noise sigma");
  }
};

struct LabeledVideo {
  FrameSequence seq;
  Trajectory gt_trajectory;
  double gt_score = 0;
  ShakeSpec spec;
};

// Sum of sinusoids plus seeded Gaussian noise, shifted so every axis starts at
// zero (the offset only touches the DC bin).
inline Trajectory gen_trajectory(const ShakeSpec& spec, std::uint64_t seed) {
  spec.validate();
  const std::size_t n = spec.length;
  Trajectory t = Trajectory::zeros(n);
  for (const auto& c : spec.components) {
    auto& path = c.axis == Axis::kX ? t.x : c.axis == Axis::kY ? t.y : t.theta;
    for (std::size_t k = 0; k < n; ++k)
      path[k] += c.amplitude *
                 std::sin(2.0 * std::numbers::pi * c.frequency * static_cast<double>(k) / n + c.phase);
  }
  if (spec.noise_sigma > 0) {
    Rng rng(seed);
    for (std::size_t k = 0; k < n; ++k) {
      t.x[k] += rng.normal(0, spec.noise_sigma);
      t.y[k] += rng.normal(0, spec.noise_sigma);
    }
  }
  for (auto* path : {&t.x, &t.y, &t.theta}) {
    const double origin = (*path)[0];
    for (auto& v : *path) v -= origin;
  }
  return t;
}

// Content transform of frame t relative to frame 0, in centred coordinates:
// p_t = R * p_0 + s. Built by composing the per-frame increments of the
// trajectory, so that the motion between frames t-1 and t is exactly the
// similarity (dx, dy, dtheta) = traj[t] - traj[t-1] about the frame centre.
struct RigidPose {
  double cos_t = 1, sin_t = 0, sx = 0, sy = 0;
};

inline std::vector<RigidPose> compose_poses(const Trajectory& traj) {
  std::vector<RigidPose> poses(traj.length());
  double angle = 0;
  for (std::size_t t = 1; t < traj.length(); ++t) {
    const double dth = traj.theta[t] - traj.theta[t - 1];
    const double c = std::cos(dth), s = std::sin(dth);
    const auto& p = poses[t - 1];
    angle += dth;
    poses[t].cos_t = std::cos(angle);
    poses[t].sin_t = std::sin(angle);
    poses[t].sx = c * p.sx - s * p.sy + (traj.x[t] - traj.x[t - 1]);
    poses[t].sy = s * p.sx + c * p.sy + (traj.y[t] - traj.y[t - 1]);
  }
  return poses;
}

inline FrameSequence render_shaky(const Frame& base, const Trajectory& traj, int out_size,
                                  double fps = 30.0) {
  if (traj.length() == 0) throw ConfigError("empty trajectory");
  const auto poses = compose_poses(traj);
  const double oc = (out_size - 1) / 2.0;
  const double bcx = (base.width() - 1) / 2.0, bcy = (base.height() - 1) / 2.0;

  // Every output corner must map strictly inside the base (bilinear needs +1).
  for (const auto& p : poses)
    for (double qx : {-oc, oc})
      for (double qy : {-oc, oc}) {
        const double rx = qx - p.sx, ry = qy - p.sy;
        const double bx = p.cos_t * rx + p.sin_t * ry, by = -p.sin_t * rx + p.cos_t * ry;
        if (std::abs(bx) > bcx - 1 || std::abs(by) > bcy - 1)
          throw MarginError("base image too small for the trajectory displacement");
      }

  const auto& px = base.rgb();
  const std::size_t bw = static_cast<std::size_t>(base.width());
  std::vector<Frame> frames;
  frames.reserve(poses.size());
  for (const auto& p : poses) {
    std::vector<std::uint8_t> out(static_cast<std::size_t>(out_size) * out_size * 3);
    for (int j = 0; j < out_size; ++j)
      for (int i = 0; i < out_size; ++i) {
        const double rx = i - oc - p.sx, ry = j - oc - p.sy;
        const double bx = bcx + p.cos_t * rx + p.sin_t * ry;
        const double by = bcy - p.sin_t * rx + p.cos_t * ry;
        const int x0 = static_cast<int>(std::floor(bx)), y0 = static_cast<int>(std::floor(by));
        const double ax = bx - x0, ay = by - y0;
        for (int c = 0; c < 3; ++c) {
          auto at = [&](int x, int y) { return static_cast<double>(px[(y * bw + x) * 3 + c]); };
          const double v = (at(x0, y0) * (1 - ax) + at(x0 + 1, y0) * ax) * (1 - ay) +
                           (at(x0, y0 + 1) * (1 - ax) + at(x0 + 1, y0 + 1) * ax) * ay;
          out[(static_cast<std::size_t>(j) * out_size + i) * 3 + c] =
              static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
        }
      }
    frames.emplace_back(out_size, out_size, std::move(out));
  }
  return FrameSequence(std::move(frames), fps);
}

// ---------------------------------------------------------------------------
// Procedural textured base images: multi-octave value noise plus filled
// shapes, lightly blurred so resampling stays close to band-limited.

inline Plane value_noise(int w, int h, int cell, Rng& rng) {
  const int gw = w / cell + 2, gh = h / cell + 2;
  std::vector<double> lattice(static_cast<std::size_t>(gw) * gh);
  for (auto& v : lattice) v = rng.uniform();
  auto smooth = [](double t) { return t * t * (3 - 2 * t); };
  Plane out(w, h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const double fx = static_cast<double>(x) / cell, fy = static_cast<double>(y) / cell;
      const int ix = static_cast<int>(fx), iy = static_cast<int>(fy);
      const double tx = smooth(fx - ix), ty = smooth(fy - iy);
      auto l = [&](int a, int b) { return lattice[static_cast<std::size_t>(b) * gw + a]; };
      const double top = l(ix, iy) * (1 - tx) + l(ix + 1, iy) * tx;
      const double bot = l(ix, iy + 1) * (1 - tx) + l(ix + 1, iy + 1) * tx;
      out(x, y) = static_cast<float>(top * (1 - ty) + bot * ty);
    }
  return out;
}

inline Frame gen_base_image(int w, int h, std::uint64_t seed) {
  Rng rng(seed);
  std::array<Plane, 3> ch{Plane(w, h), Plane(w, h), Plane(w, h)};
  const std::array<int, 4> cells{32, 16, 8, 4};
  const std::array<double, 4> weights{110, 60, 35, 20};
  for (int c = 0; c < 3; ++c)
    for (std::size_t o = 0; o < cells.size(); ++o) {
      const Plane n = value_noise(w, h, cells[o], rng);
      for (std::size_t i = 0; i < n.size(); ++i) ch[c].data[i] += static_cast<float>(weights[o] * n.data[i]);
    }
  const int shapes = 12 + static_cast<int>(rng.uniform_int(0, 8));
  for (int s = 0; s < shapes; ++s) {
    const bool disc = rng.uniform() < 0.4;
    const double cx = rng.uniform(0, w), cy = rng.uniform(0, h);
    const double rx = rng.uniform(4, w / 8.0), ry = rng.uniform(4, h / 8.0);
    const std::array<double, 3> col{rng.uniform(0, 255), rng.uniform(0, 255), rng.uniform(0, 255)};
    for (int y = std::max(0, static_cast<int>(cy - ry)); y < std::min(h, static_cast<int>(cy + ry) + 1); ++y)
      for (int x = std::max(0, static_cast<int>(cx - rx)); x < std::min(w, static_cast<int>(cx + rx) + 1); ++x) {
        const double nx = (x - cx) / rx, ny = (y - cy) / ry;
        if (disc && nx * nx + ny * ny > 1) continue;
        for (int c = 0; c < 3; ++c) ch[c](x, y) = static_cast<float>(col[c]);
      }
  }
  const auto k = gaussian_kernel(1.5);
  std::vector<std::uint8_t> px(static_cast<std::size_t>(w) * h * 3);
  for (int c = 0; c < 3; ++c) {
    const Plane b = convolve_separable(ch[c], k);
    for (std::size_t i = 0; i < b.size(); ++i)
      px[3 * i + c] = static_cast<std::uint8_t>(std::clamp(std::lround(b.data[i]), 0L, 255L));
  }
  return Frame(w, h, std::move(px));
}

// ---------------------------------------------------------------------------
// Ground-truth labels

inline constexpr double kDefaultAlpha = 0.35;     // per pixel of high-frequency RMS
inline constexpr std::size_t kLowBandMaxBin = 5;  // bins 0..5 count as intended motion

// Energy (sum of squares over time) of a path after removing DFT bins
// 0..max_bin and their mirrors, via Parseval.
inline double high_frequency_energy(const std::vector<double>& path, std::size_t max_bin) {
  const std::size_t n = path.size();
  double total = 0;
  for (double v : path) total += v * v;
  double low = 0;
  for (std::size_t k = 0; k <= max_bin && k < n; ++k) {
    std::complex<double> acc = 0;
    for (std::size_t t = 0; t < n; ++t)
      acc += path[t] * std::polar(1.0, -2.0 * std::numbers::pi * static_cast<double>(k * t % n) / n);
    const bool mirrored = k != 0 && 2 * k != n;
    low += std::norm(acc) * (mirrored ? 2.0 : 1.0);
  }
  return std::max(0.0, total - low / n);
}

// RMS of the high-frequency residual, pooling x, y and theta (theta converted
// to pixels at the given lever arm, normally half the frame width).
inline double high_frequency_rms(const Trajectory& t, double lever_px,
                                 std::size_t max_bin = kLowBandMaxBin) {
  if (t.length() == 0) return 0;
  const double e = high_frequency_energy(t.x, max_bin) + high_frequency_energy(t.y, max_bin) +
                   lever_px * lever_px * high_frequency_energy(t.theta, max_bin);
  return std::sqrt(e / static_cast<double>(t.length()));
}

inline double gt_score(const Trajectory& t, double lever_px, double alpha = kDefaultAlpha) {
  return 100.0 * std::exp(-alpha * high_frequency_rms(t, lever_px));
}

// ---------------------------------------------------------------------------
// Datasets

struct DatasetOptions {
  std::size_t length = 64;
  int out_size = 128;
  int margin = 32;
  double alpha = kDefaultAlpha;
  double fps = 30.0;
  int min_jitter_bin = 6;
  int max_jitter_bin = 12;
  double max_pan_px = 3.0;
};

// Randomised shake spec for one video at a given jitter level (pixels).
inline ShakeSpec random_shake(double level, const DatasetOptions& opt, Rng& rng) {
  ShakeSpec s;
  s.length = opt.length;
  auto bin = [&](int lo, int hi) { return static_cast<double>(rng.uniform_int(lo, hi)); };
  auto phase = [&] { return rng.uniform(0, 2 * std::numbers::pi); };
  const double lever = opt.out_size / 2.0;
  for (Axis a : {Axis::kX, Axis::kY}) {
    const double amp = level * rng.uniform(0.4, 1.0);
    const double split = rng.uniform(0.5, 1.0);
    s.components.push_back({amp * split, bin(opt.min_jitter_bin, opt.max_jitter_bin), phase(), a});
    s.components.push_back({amp * (1 - split), bin(opt.min_jitter_bin, opt.max_jitter_bin), phase(), a});
    s.components.push_back({rng.uniform(0, opt.max_pan_px), bin(1, 3), phase(), a});
  }
  s.components.push_back({level * rng.uniform(0, 0.4) / lever,
                          bin(opt.min_jitter_bin, opt.max_jitter_bin), phase(), Axis::kTheta});
  return s;
}

inline LabeledVideo make_video(const ShakeSpec& spec, std::uint64_t seed, const DatasetOptions& opt) {
  const Trajectory traj = gen_trajectory(spec, derive_seed(seed, 1));
  const int base = opt.out_size + 2 * opt.margin;
  const Frame img = gen_base_image(base, base, derive_seed(seed, 2));
  FrameSequence seq = render_shaky(img, traj, opt.out_size, opt.fps);
  const double score = gt_score(traj, opt.out_size / 2.0, opt.alpha);
  return {std::move(seq), traj, score, spec};
}

// Videos cycle through the amplitude ladder; everything else is drawn from a
// per-video stream derived from the seed.
inline LabeledVideo gen_video(std::size_t index, std::span<const double> ladder,
                              std::uint64_t seed, const DatasetOptions& opt = {}) {
  if (ladder.empty()) throw ConfigError("empty amplitude ladder");
  Rng rng(derive_seed(seed, index));
  const ShakeSpec spec = random_shake(ladder[index % ladder.size()], opt, rng);
  return make_video(spec, derive_seed(seed, index + 0x10000), opt);
}

inline std::vector<LabeledVideo> gen_dataset(std::size_t count, std::span<const double> ladder,
                                             std::uint64_t seed, const DatasetOptions& opt = {}) {
  if (count < 10) throw ConfigError("a dataset needs at least 10 videos");
  std::vector<LabeledVideo> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) out.push_back(gen_video(i, ladder, seed, opt));
  return out;
}

}  // namespace stabilitykit::synth
