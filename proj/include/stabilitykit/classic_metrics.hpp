#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <span>
#include <vector>

#include "stabilitykit/error.hpp"
#include "stabilitykit/image.hpp"
#include "stabilitykit/motion.hpp"

namespace stabilitykit::metrics {

inline constexpr double kPsnrCapDb = 100.0;

struct ItfResult {
  double score_db = 0;
  std::vector<double> per_pair_db;
};

struct ComponentScores {
  double x = 1;
  double y = 1;
  double theta = 1;
};

struct StabilityResult {
  double score = 1;
  ComponentScores components;
};

// Inclusive range of non-DC DFT bins treated as intended (low-frequency) motion.
struct Band {
  std::size_t lo = 1;
  std::size_t hi = 5;
};

enum class Combine { kMin, kMean };

struct StabilityOptions {
  Band band{};
  Combine combine = Combine::kMin;
};

inline double psnr(const Plane& a, const Plane& b) {
  if (!a.same_shape(b)) throw DimensionMismatch("PSNR planes differ in size");
  if (a.size() == 0) throw EmptyInput("PSNR of empty planes");
  double se = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = static_cast<double>(a.data[i]) - b.data[i];
    se += d * d;
  }
  const double mse = se / static_cast<double>(a.size());
  if (mse == 0) return kPsnrCapDb;
  return std::min(kPsnrCapDb, 10.0 * std::log10(255.0 * 255.0 / mse));
}

// Interframe transformation fidelity: mean PSNR of adjacent luma pairs.
inline ItfResult itf(const FrameSequence& seq) {
  if (seq.size() < 2) throw InsufficientFrames("ITF needs at least 2 frames", 2);
  ItfResult r;
  Plane prev = to_luma(seq[0]);
  double sum = 0;
  for (std::size_t k = 1; k < seq.size(); ++k) {
    Plane cur = to_luma(seq[k]);
    r.per_pair_db.push_back(psnr(prev, cur));
    sum += r.per_pair_db.back();
    prev = std::move(cur);
  }
  r.score_db = sum / static_cast<double>(r.per_pair_db.size());
  return r;
}

// Share of non-DC spectral energy (bins 1..M/2) that falls inside the band.
// A path with no non-DC energy is perfectly stable and scores 1.
inline double freq_energy_ratio(std::span<const double> path, Band band) {
  const std::size_t m = path.size();
  if (m < 16) throw InsufficientFrames("spectral ratio needs a path of at least 16 samples", 16);
  if (band.lo < 1 || band.hi < band.lo) throw ConfigError("band must satisfy 1 <= lo <= hi");
  // Centre first so the DC term cannot leak into the other bins; what remains
  // below rounding level of the raw path counts as no motion.
  double mean = 0, raw = 0;
  for (double v : path) mean += v, raw += v * v;
  mean /= static_cast<double>(m);
  double in_band = 0, total = 0;
  for (std::size_t k = 1; k <= m / 2; ++k) {
    std::complex<double> acc = 0;
    for (std::size_t t = 0; t < m; ++t)
      acc += (path[t] - mean) * std::polar(1.0, -2.0 * std::numbers::pi * static_cast<double>(k * t % m) /
                                           static_cast<double>(m));
    const double e = std::norm(acc);
    total += e;
    if (k >= band.lo && k <= band.hi) in_band += e;
  }
  if (total <= 1e-24 * static_cast<double>(m) * raw) return 1.0;
  return std::clamp(in_band / total, 0.0, 1.0);
}

inline StabilityResult stability_score(const Trajectory& traj, const StabilityOptions& opt = {}) {
  if (traj.length() < 16)
    throw InsufficientFrames("stability score needs a trajectory of at least 16 frames", 16);
  StabilityResult r;
  r.components.x = freq_energy_ratio(traj.x, opt.band);
  r.components.y = freq_energy_ratio(traj.y, opt.band);
  r.components.theta = freq_energy_ratio(traj.theta, opt.band);
  const auto& c = r.components;
  r.score = opt.combine == Combine::kMin ? std::min({c.x, c.y, c.theta})
                                         : (c.x + c.y + c.theta) / 3.0;
  return r;
}

}  // namespace stabilitykit::metrics
