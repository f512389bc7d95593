#pragma once

#include <algorithm>
#include <array>
#include <complex>
#include <cmath>
#include <map>
#include <memory>
#include <numbers>
#include <optional>
#include <span>
#include <vector>

#include "stabilitykit/error.hpp"
#include "stabilitykit/image.hpp"
#include "stabilitykit/media_io.hpp"
#include "stabilitykit/motion.hpp"

namespace stabilitykit::features {

inline constexpr std::size_t kFlowStats = 8;
inline constexpr std::size_t kFlowDim = 2 * kFlowStats;  // C_o
inline constexpr std::size_t kSemanticDim = 8;           // C_s
inline constexpr std::size_t kBlurDim = 4;               // C_b

// Sampling and extractor settings shared by training and inference.
struct FeatureConfig {
  std::size_t n = 32;       // frames per clip
  std::size_t tau = 2;      // clip stride in source frames
  std::size_t tau_b = 8;    // blur stride inside the clip
  int grid = 8;             // flow cells per side
  int resize = 224;         // semantic/blur input side

  void validate() const {
    if (n < 3) throw ConfigError("clip must hold at least 3 frames");
    if (tau < 1) throw ConfigError("tau must be >= 1");
    if (tau_b < 1 || n % tau_b != 0) throw ConfigError("tau_b must divide N");
    if (grid < 4 || grid > 32) throw ConfigError("grid must be in [4, 32]");
    if (resize < 16) throw ConfigError("resize side must be >= 16");
  }
  bool operator==(const FeatureConfig&) const = default;
};

struct FeatureDims {
  std::size_t c_o = kFlowDim;
  std::size_t c_s = kSemanticDim;
  std::size_t c_b = kBlurDim;
  std::size_t n = 32;
  std::size_t n_b = 4;
  std::size_t tau_b = 8;

  std::size_t fused() const { return c_o + n * c_s + n_b * c_b; }
  static FeatureDims of(const FeatureConfig& cfg) {
    return {kFlowDim, kSemanticDim, kBlurDim, cfg.n, cfg.n / cfg.tau_b, cfg.tau_b};
  }
  friend bool operator==(const FeatureDims&, const FeatureDims&) = default;
};

struct FeatureBundle {
  std::vector<double> f_o;
  std::vector<double> f_s;
  std::vector<double> f_b;
  FeatureDims dims;

  void validate() const {
    if (f_o.size() != dims.c_o || f_s.size() != dims.n * dims.c_s ||
        f_b.size() != dims.n_b * dims.c_b)
      throw DimensionMismatch("feature bundle lengths do not match its dims");
  }
};

struct FusedFeature {
  std::vector<double> f;
  std::size_t dim = 0;
};

// ---------------------------------------------------------------------------
// Flow branch

// Per field: mean u, mean v, std u, std v, mean |w|, std |w|, mean |du|, mean |dv|
// (du/dv against the previous field, zero for the first). Output: temporal
// mean of each stat followed by its temporal std.
inline std::vector<double> flow_features(std::span<const FlowField> flows) {
  if (flows.size() < 2) throw InsufficientFrames("flow features need at least 2 flow fields", 3);
  std::vector<std::array<double, kFlowStats>> per;
  for (std::size_t k = 0; k < flows.size(); ++k) {
    const auto& f = flows[k];
    if (f.size() == 0 || (k > 0 && f.size() != flows[k - 1].size()))
      throw DimensionMismatch("flow fields differ in size");
    const double n = static_cast<double>(f.size());
    double mu = 0, mv = 0, mm = 0;
    for (std::size_t i = 0; i < f.size(); ++i) {
      mu += f.u[i];
      mv += f.v[i];
      mm += std::hypot(f.u[i], f.v[i]);
    }
    mu /= n, mv /= n, mm /= n;
    double su = 0, sv = 0, sm = 0, du = 0, dv = 0;
    for (std::size_t i = 0; i < f.size(); ++i) {
      su += (f.u[i] - mu) * (f.u[i] - mu);
      sv += (f.v[i] - mv) * (f.v[i] - mv);
      const double m = std::hypot(f.u[i], f.v[i]);
      sm += (m - mm) * (m - mm);
      if (k > 0) {
        du += std::abs(f.u[i] - flows[k - 1].u[i]);
        dv += std::abs(f.v[i] - flows[k - 1].v[i]);
      }
    }
    per.push_back({mu, mv, std::sqrt(su / n), std::sqrt(sv / n), mm, std::sqrt(sm / n), du / n,
                   dv / n});
  }
  std::vector<double> out(kFlowDim, 0.0);
  const double t = static_cast<double>(per.size());
  for (const auto& s : per)
    for (std::size_t j = 0; j < kFlowStats; ++j) out[j] += s[j] / t;
  for (const auto& s : per)
    for (std::size_t j = 0; j < kFlowStats; ++j)
      out[kFlowStats + j] += (s[j] - out[j]) * (s[j] - out[j]) / t;
  for (std::size_t j = 0; j < kFlowStats; ++j) out[kFlowStats + j] = std::sqrt(out[kFlowStats + j]);
  return out;
}

// ---------------------------------------------------------------------------
// Semantic branch

// luma mean, luma std, mean gradient magnitude, 8-bin magnitude-weighted
// gradient-orientation entropy (bits), then 2x2 block means TL, TR, BL, BR.
inline std::array<double, kSemanticDim> semantic_frame(const Plane& luma) {
  const double n = static_cast<double>(luma.size());
  double mean = 0;
  for (float v : luma.data) mean += v;
  mean /= n;
  double var = 0;
  for (float v : luma.data) var += (v - mean) * (v - mean);

  double grad = 0;
  std::array<double, 8> hist{};
  for (int y = 0; y < luma.height; ++y)
    for (int x = 0; x < luma.width; ++x) {
      const double gx = 0.5 * (luma.clamped(x + 1, y) - luma.clamped(x - 1, y));
      const double gy = 0.5 * (luma.clamped(x, y + 1) - luma.clamped(x, y - 1));
      const double m = std::hypot(gx, gy);
      grad += m;
      if (m > 0) {
        const double a = std::atan2(gy, gx) + std::numbers::pi;  // [0, 2pi]
        const auto bin = std::min<std::size_t>(7, static_cast<std::size_t>(a / (2 * std::numbers::pi) * 8));
        hist[bin] += m;
      }
    }
  double entropy = 0;
  if (grad > 0)
    for (double h : hist)
      if (h > 0) entropy -= (h / grad) * std::log2(h / grad);

  std::array<double, 4> block{};
  std::array<double, 4> count{};
  const int hw = luma.width / 2, hh = luma.height / 2;
  for (int y = 0; y < luma.height; ++y)
    for (int x = 0; x < luma.width; ++x) {
      const int b = (y >= hh ? 2 : 0) + (x >= hw ? 1 : 0);
      block[b] += luma(x, y);
      count[b] += 1;
    }
  return {mean, std::sqrt(var / n), grad / n, entropy, block[0] / count[0], block[1] / count[1],
          block[2] / count[2], block[3] / count[3]};
}

inline Plane resized_luma(const Frame& f, int side) { return to_luma(resize_bilinear(f, side, side)); }

inline std::vector<double> semantic_features(const Clip& clip, int side = 224) {
  std::vector<double> out;
  out.reserve(clip.frames.size() * kSemanticDim);
  for (const auto& f : clip.frames) {
    const auto s = semantic_frame(resized_luma(f, side));
    out.insert(out.end(), s.begin(), s.end());
  }
  return out;
}

// ---------------------------------------------------------------------------
// Blur branch

// Fraction of non-DC spectral energy above a quarter cycle per pixel on either
// axis. The spectrum is that of the mirror-extended frame (an orthonormal
// DCT-II), so the wrap-around seam of a plain DFT does not leak energy into the
// high band. Only the low block is transformed; the total comes from Parseval.
inline double high_frequency_ratio(const Plane& p) {
  const int w = p.width, h = p.height;
  const int nu = (w + 1) / 2, nv = (h + 1) / 2;  // 4u < 2w
  double sum = 0, sum_sq = 0;
  for (float v : p.data) {
    sum += v;
    sum_sq += static_cast<double>(v) * v;
  }
  const double n = static_cast<double>(w) * h;
  const double dc = sum * sum / n;
  const double total_non_dc = sum_sq - dc;
  if (!(total_non_dc > 1e-9 * std::max(sum_sq, 1.0))) return 0.0;

  auto basis = [](int len, int count) {
    std::vector<double> b(static_cast<std::size_t>(len) * count);
    for (int u = 0; u < count; ++u)
      for (int x = 0; x < len; ++x)
        b[static_cast<std::size_t>(u) * len + x] =
            std::sqrt((u ? 2.0 : 1.0) / len) * std::cos(std::numbers::pi * (x + 0.5) * u / len);
    return b;
  };
  const auto bx = basis(w, nu), by = basis(h, nv);
  std::vector<double> rows(static_cast<std::size_t>(h) * nu);
  for (int y = 0; y < h; ++y)
    for (int u = 0; u < nu; ++u) {
      double acc = 0;
      for (int x = 0; x < w; ++x) acc += p(x, y) * bx[static_cast<std::size_t>(u) * w + x];
      rows[static_cast<std::size_t>(y) * nu + u] = acc;
    }
  double low = 0;
  for (int u = 0; u < nu; ++u)
    for (int v = 0; v < nv; ++v) {
      double acc = 0;
      for (int y = 0; y < h; ++y) acc += rows[static_cast<std::size_t>(y) * nu + u] * by[static_cast<std::size_t>(v) * h + y];
      low += acc * acc;
    }
  return std::clamp((total_non_dc - (low - dc)) / total_non_dc, 0.0, 1.0);
}

// Laplacian variance, mean Sobel magnitude, high-frequency ratio, Tenengrad.
inline std::array<double, kBlurDim> blur_frame(const Plane& luma) {
  const double n = static_cast<double>(luma.size());
  double lap_sum = 0, lap_sq = 0, mag = 0, ten = 0;
  for (int y = 0; y < luma.height; ++y)
    for (int x = 0; x < luma.width; ++x) {
      const double c = luma(x, y);
      const double lap = luma.clamped(x - 1, y) + luma.clamped(x + 1, y) + luma.clamped(x, y - 1) +
                         luma.clamped(x, y + 1) - 4 * c;
      lap_sum += lap;
      lap_sq += lap * lap;
      const double gx = luma.clamped(x + 1, y - 1) + 2 * luma.clamped(x + 1, y) +
                        luma.clamped(x + 1, y + 1) - luma.clamped(x - 1, y - 1) -
                        2 * luma.clamped(x - 1, y) - luma.clamped(x - 1, y + 1);
      const double gy = luma.clamped(x - 1, y + 1) + 2 * luma.clamped(x, y + 1) +
                        luma.clamped(x + 1, y + 1) - luma.clamped(x - 1, y - 1) -
                        2 * luma.clamped(x, y - 1) - luma.clamped(x + 1, y - 1);
      mag += std::hypot(gx, gy);
      ten += gx * gx + gy * gy;
    }
  const double lap_mean = lap_sum / n;
  return {std::max(0.0, lap_sq / n - lap_mean * lap_mean), mag / n, high_frequency_ratio(luma),
          ten / n};
}

// Clip positions (0-based) of the blur frames: tau_b-1, 2*tau_b-1, ..., N-1.
inline std::vector<std::size_t> blur_positions(std::size_t n, std::size_t tau_b) {
  if (tau_b == 0 || n % tau_b != 0) throw ConfigError("tau_b must divide the clip length");
  std::vector<std::size_t> pos;
  for (std::size_t k = 1; k <= n / tau_b; ++k) pos.push_back(k * tau_b - 1);
  return pos;
}

inline std::vector<double> blur_features(const Clip& clip, std::size_t tau_b, int side = 224) {
  std::vector<double> out;
  for (auto k : blur_positions(clip.frames.size(), tau_b)) {
    const auto b = blur_frame(resized_luma(clip.frames[k], side));
    out.insert(out.end(), b.begin(), b.end());
  }
  return out;
}

// ---------------------------------------------------------------------------
// Fusion

inline FusedFeature fuse(const FeatureBundle& b) {
  b.validate();
  FusedFeature out;
  out.f.reserve(b.dims.fused());
  out.f.insert(out.f.end(), b.f_o.begin(), b.f_o.end());
  out.f.insert(out.f.end(), b.f_s.begin(), b.f_s.end());
  out.f.insert(out.f.end(), b.f_b.begin(), b.f_b.end());
  out.dim = b.dims.fused();
  return out;
}

// Textureless pairs carry no measurable motion and yield a zero field.
inline FlowField pair_flow(const motion::FrameFeatures& a, const motion::FrameFeatures& b, int grid) {
  try {
    return motion::grid_flow(a, b, grid);
  } catch (const TrackingFailure&) {
    return FlowField(grid, grid);
  }
}

inline std::vector<FlowField> clip_flows(const Clip& clip, int grid) {
  std::vector<motion::FrameFeatures> prepared;
  for (const auto& f : clip.frames) prepared.push_back(motion::prepare_frame(f));
  std::vector<FlowField> flows;
  for (std::size_t k = 0; k + 1 < prepared.size(); ++k)
    flows.push_back(pair_flow(prepared[k], prepared[k + 1], grid));
  return flows;
}

inline FeatureBundle extract_bundle(const Clip& clip, const FeatureConfig& cfg) {
  cfg.validate();
  if (clip.frames.size() != cfg.n) throw DimensionMismatch("clip length differs from config N");
  const auto flows = clip_flows(clip, cfg.grid);
  return {flow_features(flows), semantic_features(clip, cfg.resize),
          blur_features(clip, cfg.tau_b, cfg.resize), FeatureDims::of(cfg)};
}

// Lazily computes and memoises per-frame and per-pair work for one video so
// that overlapping clips share it. Not thread-safe; use one per worker.
class VideoFeatureCache {
 public:
  VideoFeatureCache(const FrameSequence& seq, FeatureConfig cfg) : seq_(seq), cfg_(cfg) {
    cfg_.validate();
  }

  std::size_t valid_starts() const {
    const std::size_t span = io::clip_span(cfg_.n, cfg_.tau);
    return seq_.size() >= span ? seq_.size() - span + 1 : 0;
  }

  FeatureBundle bundle_at(std::size_t start) {
    if (start + io::clip_span(cfg_.n, cfg_.tau) > seq_.size())
      throw InsufficientFrames("clip exceeds sequence", start + io::clip_span(cfg_.n, cfg_.tau));
    FeatureBundle b;
    b.dims = FeatureDims::of(cfg_);
    std::vector<FlowField> flows;
    for (std::size_t k = 0; k + 1 < cfg_.n; ++k) flows.push_back(flow(start + k * cfg_.tau));
    b.f_o = flow_features(flows);
    for (std::size_t k = 0; k < cfg_.n; ++k) {
      const auto& s = semantic(start + k * cfg_.tau);
      b.f_s.insert(b.f_s.end(), s.begin(), s.end());
    }
    for (auto k : blur_positions(cfg_.n, cfg_.tau_b)) {
      const auto& s = blur(start + k * cfg_.tau);
      b.f_b.insert(b.f_b.end(), s.begin(), s.end());
    }
    return b;
  }

  std::vector<double> fused_at(std::size_t start) { return fuse(bundle_at(start)).f; }

 private:
  const motion::FrameFeatures& prepared(std::size_t i) {
    auto it = prepared_.find(i);
    if (it == prepared_.end()) it = prepared_.emplace(i, motion::prepare_frame(seq_[i])).first;
    return it->second;
  }
  const FlowField& flow(std::size_t i) {
    auto it = flows_.find(i);
    if (it == flows_.end())
      it = flows_.emplace(i, pair_flow(prepared(i), prepared(i + cfg_.tau), cfg_.grid)).first;
    return it->second;
  }
  const Plane& resized(std::size_t i) {
    auto it = resized_.find(i);
    if (it == resized_.end()) it = resized_.emplace(i, resized_luma(seq_[i], cfg_.resize)).first;
    return it->second;
  }
  const std::array<double, kSemanticDim>& semantic(std::size_t i) {
    auto it = semantic_.find(i);
    if (it == semantic_.end()) it = semantic_.emplace(i, semantic_frame(resized(i))).first;
    return it->second;
  }
  const std::array<double, kBlurDim>& blur(std::size_t i) {
    auto it = blur_.find(i);
    if (it == blur_.end()) it = blur_.emplace(i, blur_frame(resized(i))).first;
    return it->second;
  }

  const FrameSequence& seq_;
  FeatureConfig cfg_;
  std::map<std::size_t, motion::FrameFeatures> prepared_;
  std::map<std::size_t, FlowField> flows_;
  std::map<std::size_t, Plane> resized_;
  std::map<std::size_t, std::array<double, kSemanticDim>> semantic_;
  std::map<std::size_t, std::array<double, kBlurDim>> blur_;
};

}  // namespace stabilitykit::features
