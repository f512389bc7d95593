#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <istream>
#include <limits>
#include <numbers>
#include <optional>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "stabilitykit/error.hpp"
#include "stabilitykit/eval.hpp"
#include "stabilitykit/features.hpp"
#include "stabilitykit/media_io.hpp"
#include "stabilitykit/rng.hpp"

namespace stabilitykit::model {

inline constexpr std::size_t kHidden = 128;

struct ModelParams {
  std::size_t input_dim = 0;
  std::size_t hidden = kHidden;
  std::vector<double> w1;  // hidden x input_dim, row-major
  std::vector<double> b1;
  std::vector<double> w2;
  double b2 = 0;
  std::vector<double> norm_mean;
  std::vector<double> norm_std;
  features::FeatureConfig features{};

  static ModelParams zeros(std::size_t d, std::size_t hidden = kHidden) {
    ModelParams p;
    p.input_dim = d;
    p.hidden = hidden;
    p.w1.assign(hidden * d, 0.0);
    p.b1.assign(hidden, 0.0);
    p.w2.assign(hidden, 0.0);
    p.norm_mean.assign(d, 0.0);
    p.norm_std.assign(d, 1.0);
    return p;
  }

  // Uniform fan-in scaling: w ~ U(-sqrt(6/fan_in), +sqrt(6/fan_in)), biases zero.
  static ModelParams init(std::size_t d, std::uint64_t seed, std::size_t hidden = kHidden) {
    auto p = zeros(d, hidden);
    Rng rng(seed);
    const double l1 = std::sqrt(6.0 / static_cast<double>(d));
    for (auto& w : p.w1) w = rng.uniform(-l1, l1);
    const double l2 = std::sqrt(6.0 / static_cast<double>(hidden));
    for (auto& w : p.w2) w = rng.uniform(-l2, l2);
    return p;
  }

  void validate() const {
    if (input_dim == 0 || hidden == 0) throw ConfigError("model dimensions must be positive");
    if (w1.size() != hidden * input_dim || b1.size() != hidden || w2.size() != hidden ||
        norm_mean.size() != input_dim || norm_std.size() != input_dim)
      throw DimensionMismatch("model parameter shapes are inconsistent");
    for (double s : norm_std)
      if (!(s > 0)) throw ConfigError("normalisation std must be positive");
  }

  std::size_t parameter_count() const { return w1.size() + b1.size() + w2.size() + 1; }
};

// Per-coordinate mean and population std; zero-variance coordinates get std 1.
inline void fit_normalisation(ModelParams& p, std::span<const std::vector<double>> rows) {
  if (rows.empty()) throw EmptyInput("no rows for normalisation statistics");
  const std::size_t d = p.input_dim;
  std::vector<double> mean(d, 0.0), var(d, 0.0);
  for (const auto& r : rows) {
    if (r.size() != d) throw DimensionMismatch("feature row has the wrong dimension");
    for (std::size_t k = 0; k < d; ++k) mean[k] += r[k];
  }
  for (auto& m : mean) m /= static_cast<double>(rows.size());
  for (const auto& r : rows)
    for (std::size_t k = 0; k < d; ++k) var[k] += (r[k] - mean[k]) * (r[k] - mean[k]);
  p.norm_mean = mean;
  p.norm_std.resize(d);
  for (std::size_t k = 0; k < d; ++k) {
    const double s = std::sqrt(var[k] / static_cast<double>(rows.size()));
    p.norm_std[k] = s > 1e-12 ? s : 1.0;
  }
}

inline std::vector<double> normalise(const ModelParams& p, std::span<const double> f) {
  if (f.size() != p.input_dim)
    throw DimensionMismatch("feature length " + std::to_string(f.size()) + " != model input " +
                            std::to_string(p.input_dim));
  std::vector<double> z(f.size());
  for (std::size_t k = 0; k < f.size(); ++k) z[k] = (f[k] - p.norm_mean[k]) / p.norm_std[k];
  return z;
}

struct Activations {
  std::vector<double> z;
  std::vector<double> pre;  // w1 z + b1
  double out = 0;
};

inline Activations forward_full(const ModelParams& p, std::span<const double> f) {
  Activations a;
  a.z = normalise(p, f);
  a.pre.assign(p.hidden, 0.0);
  a.out = p.b2;
  for (std::size_t j = 0; j < p.hidden; ++j) {
    double s = p.b1[j];
    const double* row = &p.w1[j * p.input_dim];
    for (std::size_t k = 0; k < p.input_dim; ++k) s += row[k] * a.z[k];
    a.pre[j] = s;
    if (s > 0) a.out += p.w2[j] * s;
  }
  return a;
}

inline double mlp_forward(const ModelParams& p, std::span<const double> f) {
  return forward_full(p, f).out;
}

// ---------------------------------------------------------------------------
// Losses

namespace detail {

inline void require_batch(std::span<const double> pred, std::span<const double> mos) {
  if (pred.size() != mos.size()) throw DimensionMismatch("pred and mos lengths differ");
  if (pred.size() < 2) throw InsufficientData("loss needs at least 2 samples");
}

struct Centred {
  std::vector<double> d;
  double ss = 0;
};

inline Centred centre(std::span<const double> v) {
  Centred c;
  const double m = eval::mean(v);
  for (double x : v) {
    c.d.push_back(x - m);
    c.ss += (x - m) * (x - m);
  }
  return c;
}

}  // namespace detail

// (1 - r) / 2. Constant predictions give r = 0.
inline double plcc_loss(std::span<const double> pred, std::span<const double> mos) {
  detail::require_batch(pred, mos);
  const auto a = detail::centre(pred), b = detail::centre(mos);
  if (b.ss == 0) throw DegenerateBatch("constant MOS in batch");
  if (a.ss == 0) return 0.5;
  double sab = 0;
  for (std::size_t i = 0; i < a.d.size(); ++i) sab += a.d[i] * b.d[i];
  const double r = std::clamp(sab / std::sqrt(a.ss * b.ss), -1.0, 1.0);
  return 0.5 * (1.0 - r);
}

inline double rank_loss(std::span<const double> pred, std::span<const double> mos) {
  detail::require_batch(pred, mos);
  const std::size_t n = pred.size();
  double s = 0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      const double e = mos[i] >= mos[j] ? 1.0 : -1.0;
      s += std::max(0.0, std::abs(mos[i] - mos[j]) - e * (pred[i] - pred[j]));
    }
  return s / static_cast<double>(n * n);
}

inline double loss_total(std::span<const double> pred, std::span<const double> mos, double lambda) {
  return plcc_loss(pred, mos) + lambda * rank_loss(pred, mos);
}

struct LossGrad {
  double loss = 0;
  double plcc = 0;
  double rank = 0;
  std::vector<double> d_pred;
};

// Loss and its gradient with respect to each prediction. A constant-MOS batch
// contributes 0.5 to the loss and nothing to the gradient; so does a
// constant-prediction batch. Hinge and rectifier kinks take gradient 0.
inline LossGrad loss_and_grad(std::span<const double> pred, std::span<const double> mos,
                              double lambda) {
  detail::require_batch(pred, mos);
  const std::size_t n = pred.size();
  LossGrad g;
  g.d_pred.assign(n, 0.0);
  const auto a = detail::centre(pred), b = detail::centre(mos);
  if (a.ss == 0 || b.ss == 0) {
    g.plcc = 0.5;
  } else {
    double sab = 0;
    for (std::size_t i = 0; i < n; ++i) sab += a.d[i] * b.d[i];
    const double root = std::sqrt(a.ss * b.ss);
    const double r = sab / root;
    g.plcc = 0.5 * (1.0 - r);
    for (std::size_t i = 0; i < n; ++i) g.d_pred[i] = -0.5 * (b.d[i] / root - r * a.d[i] / a.ss);
  }
  const double inv = 1.0 / static_cast<double>(n * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      const double e = mos[i] >= mos[j] ? 1.0 : -1.0;
      const double h = std::abs(mos[i] - mos[j]) - e * (pred[i] - pred[j]);
      if (h > 0) {
        g.rank += h * inv;
        g.d_pred[i] -= lambda * e * inv;
        g.d_pred[j] += lambda * e * inv;
      }
    }
  g.loss = g.plcc + lambda * g.rank;
  return g;
}

// ---------------------------------------------------------------------------
// Backpropagation

struct Gradients {
  std::vector<double> w1;
  std::vector<double> b1;
  std::vector<double> w2;
  double b2 = 0;

  static Gradients zeros_like(const ModelParams& p) {
    return {std::vector<double>(p.w1.size(), 0.0), std::vector<double>(p.hidden, 0.0),
            std::vector<double>(p.hidden, 0.0), 0.0};
  }
  double norm() const {
    double s = b2 * b2;
    for (const auto* v : {&w1, &b1, &w2})
      for (double x : *v) s += x * x;
    return std::sqrt(s);
  }
};

struct BackwardResult {
  double loss = 0;
  std::vector<double> pred;
  Gradients grad;
};

inline BackwardResult backward(const ModelParams& p, std::span<const std::vector<double>> batch,
                               std::span<const double> mos, double lambda) {
  if (batch.size() != mos.size()) throw DimensionMismatch("batch and mos lengths differ");
  if (batch.size() < 2) throw InsufficientData("backward needs a batch of at least 2");
  std::vector<Activations> acts;
  BackwardResult r;
  for (const auto& f : batch) {
    acts.push_back(forward_full(p, f));
    r.pred.push_back(acts.back().out);
  }
  const auto lg = loss_and_grad(r.pred, mos, lambda);
  r.loss = lg.loss;
  r.grad = Gradients::zeros_like(p);
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const double g = lg.d_pred[i];
    if (g == 0) continue;
    r.grad.b2 += g;
    const auto& a = acts[i];
    for (std::size_t j = 0; j < p.hidden; ++j) {
      if (!(a.pre[j] > 0)) continue;
      r.grad.w2[j] += g * a.pre[j];
      const double gh = g * p.w2[j];
      r.grad.b1[j] += gh;
      double* row = &r.grad.w1[j * p.input_dim];
      for (std::size_t k = 0; k < p.input_dim; ++k) row[k] += gh * a.z[k];
    }
  }
  return r;
}

// ---------------------------------------------------------------------------
// Training

struct TrainConfig {
  double lambda = 0.3;
  std::size_t epochs = 30;
  std::size_t batch_size = 4;
  double lr_head = 1e-3;
  std::uint64_t seed = 0;
  std::string schedule = "cosine";  // "cosine" or "constant"

  void validate() const {
    if (!(lambda >= 0)) throw ConfigError("lambda must be >= 0");
    if (batch_size < 2) throw ConfigError("batch_size must be >= 2");
    if (epochs < 1) throw ConfigError("epochs must be >= 1");
    if (!(lr_head >= 0)) throw ConfigError("lr_head must be >= 0");
    if (schedule != "cosine" && schedule != "constant")
      throw ConfigError("schedule must be 'cosine' or 'constant'");
  }
};

// One labelled video: every candidate clip's fused feature vector plus its MOS.
// Each epoch draws one candidate per video.
struct TrainSample {
  std::vector<std::vector<double>> clips;
  double mos = 0;
};

struct EpochLog {
  std::size_t epoch = 0;
  double loss = 0;
  std::optional<double> val_srocc;
};

struct TrainResult {
  ModelParams params;
  std::vector<EpochLog> log;
  std::optional<std::size_t> best_epoch;
};

inline double schedule_factor(const TrainConfig& cfg, std::size_t step, std::size_t total) {
  if (cfg.schedule == "constant" || total == 0) return 1.0;
  return 0.5 * (1.0 + std::cos(std::numbers::pi * static_cast<double>(step) /
                               static_cast<double>(total)));
}

// Mean prediction over a sample's candidate clips.
inline double predict_sample(const ModelParams& p, const TrainSample& s) {
  double sum = 0;
  for (const auto& c : s.clips) sum += mlp_forward(p, c);
  return sum / static_cast<double>(s.clips.size());
}

namespace detail {

struct Adam {
  std::vector<double> m, v;
  std::size_t t = 0;
  explicit Adam(std::size_t n) : m(n, 0.0), v(n, 0.0) {}
};

template <typename F>
void for_each_param(ModelParams& p, Gradients& g, F&& f) {
  std::size_t k = 0;
  for (std::size_t i = 0; i < p.w1.size(); ++i) f(k++, p.w1[i], g.w1[i]);
  for (std::size_t i = 0; i < p.b1.size(); ++i) f(k++, p.b1[i], g.b1[i]);
  for (std::size_t i = 0; i < p.w2.size(); ++i) f(k++, p.w2[i], g.w2[i]);
  f(k++, p.b2, g.b2);
}

}  // namespace detail

// Parameters training starts from (before normalisation statistics are fitted).
inline ModelParams initial_params(std::size_t input_dim, const TrainConfig& cfg,
                                  const features::FeatureConfig& fcfg = {}) {
  auto p = ModelParams::init(input_dim, derive_seed(cfg.seed, 0x1417));
  p.features = fcfg;
  return p;
}

inline TrainResult train(const std::vector<TrainSample>& data, const TrainConfig& cfg,
                         const features::FeatureConfig& fcfg = {},
                         const std::vector<TrainSample>* validation = nullptr) {
  cfg.validate();
  if (data.size() < 2 * cfg.batch_size)
    throw InsufficientData("training needs at least " + std::to_string(2 * cfg.batch_size) +
                           " samples, got " + std::to_string(data.size()));
  const bool constant = std::all_of(data.begin(), data.end(),
                                    [&](const TrainSample& s) { return s.mos == data[0].mos; });
  if (constant) throw InsufficientData("all training labels are equal");
  std::vector<std::vector<double>> all_rows;
  for (const auto& s : data) {
    if (s.clips.empty()) throw EmptyInput("training sample without clips");
    all_rows.insert(all_rows.end(), s.clips.begin(), s.clips.end());
  }
  const std::size_t d = all_rows.front().size();

  TrainResult res;
  res.params = initial_params(d, cfg, fcfg);
  fit_normalisation(res.params, all_rows);

  Rng rng(derive_seed(cfg.seed, 0x5eed));
  detail::Adam adam(res.params.parameter_count());
  constexpr double kBeta1 = 0.9, kBeta2 = 0.999, kEps = 1e-8;
  const std::size_t steps_per_epoch = data.size() / cfg.batch_size +
                                      (data.size() % cfg.batch_size >= 2 ? 1 : 0);
  const std::size_t total_steps = steps_per_epoch * cfg.epochs;
  std::optional<double> best_val;
  std::optional<ModelParams> best;

  std::vector<std::size_t> order(data.size());
  for (std::size_t e = 1; e <= cfg.epochs; ++e) {
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    rng.shuffle(order);
    std::vector<std::size_t> pick(data.size());
    for (std::size_t i = 0; i < data.size(); ++i)
      pick[i] = static_cast<std::size_t>(
          rng.uniform_int(0, static_cast<std::int64_t>(data[i].clips.size()) - 1));

    double loss_sum = 0;
    std::size_t batches = 0;
    for (std::size_t s = 0; s < order.size(); s += cfg.batch_size) {
      const std::size_t end = std::min(order.size(), s + cfg.batch_size);
      if (end - s < 2) continue;
      std::vector<std::vector<double>> xb;
      std::vector<double> yb;
      for (std::size_t i = s; i < end; ++i) {
        xb.push_back(data[order[i]].clips[pick[order[i]]]);
        yb.push_back(data[order[i]].mos);
      }
      auto br = backward(res.params, xb, yb, cfg.lambda);
      loss_sum += br.loss;
      ++batches;
      const double lr = cfg.lr_head * schedule_factor(cfg, adam.t, total_steps);
      ++adam.t;
      const double c1 = 1.0 - std::pow(kBeta1, static_cast<double>(adam.t));
      const double c2 = 1.0 - std::pow(kBeta2, static_cast<double>(adam.t));
      detail::for_each_param(res.params, br.grad, [&](std::size_t k, double& w, double g) {
        adam.m[k] = kBeta1 * adam.m[k] + (1 - kBeta1) * g;
        adam.v[k] = kBeta2 * adam.v[k] + (1 - kBeta2) * g * g;
        w -= lr * (adam.m[k] / c1) / (std::sqrt(adam.v[k] / c2) + kEps);
      });
    }

    EpochLog entry{e, batches ? loss_sum / static_cast<double>(batches) : 0.0, std::nullopt};
    if (validation && validation->size() >= 3) {
      std::vector<double> pv, mv;
      for (const auto& s : *validation) {
        pv.push_back(predict_sample(res.params, s));
        mv.push_back(s.mos);
      }
      try {
        entry.val_srocc = eval::srocc(pv, mv);
      } catch (const DegenerateInput&) {
        entry.val_srocc = 0.0;
      }
    }
    res.log.push_back(entry);
    if (entry.val_srocc && (!best_val || *entry.val_srocc > *best_val)) {
      best_val = entry.val_srocc;
      res.best_epoch = e;
      best = res.params;
    }
  }
  if (best) res.params = std::move(*best);
  return res;
}

// ---------------------------------------------------------------------------
// Inference

inline double predict_clip(const ModelParams& p, features::VideoFeatureCache& cache,
                           std::size_t start) {
  return mlp_forward(p, cache.fused_at(start));
}

// Mean of n_clips single-clip predictions; clip k starts where
// sample_clip_start puts it under derive_seed(seed, k).
inline double predict_video(const ModelParams& p, features::VideoFeatureCache& cache,
                            std::size_t length, std::size_t n_clips, std::uint64_t seed) {
  if (n_clips == 0) throw ConfigError("n_clips must be >= 1");
  const auto& fc = p.features;
  double sum = 0;
  for (std::size_t k = 0; k < n_clips; ++k)
    sum += predict_clip(p, cache, io::sample_clip_start(length, fc.n, fc.tau, derive_seed(seed, k)));
  return sum / static_cast<double>(n_clips);
}

// Every candidate clip of a video, indexed by start frame.
inline TrainSample make_sample(const FrameSequence& seq, double mos,
                               const features::FeatureConfig& cfg) {
  io::sample_clip_start(seq.size(), cfg.n, cfg.tau, 0);  // length check
  features::VideoFeatureCache cache(seq, cfg);
  TrainSample s;
  s.mos = mos;
  for (std::size_t start = 0; start < cache.valid_starts(); ++start)
    s.clips.push_back(cache.fused_at(start));
  return s;
}

// Same clip choice as the frame-based predict_video, read from a sample made
// by make_sample.
inline double predict_video(const ModelParams& p, const TrainSample& s, std::size_t n_clips,
                            std::uint64_t seed) {
  if (n_clips == 0) throw ConfigError("n_clips must be >= 1");
  if (s.clips.empty()) throw EmptyInput("sample has no clips");
  const auto& fc = p.features;
  const std::size_t length = s.clips.size() + io::clip_span(fc.n, fc.tau) - 1;
  double sum = 0;
  for (std::size_t k = 0; k < n_clips; ++k)
    sum += mlp_forward(p, s.clips[io::sample_clip_start(length, fc.n, fc.tau, derive_seed(seed, k))]);
  return sum / static_cast<double>(n_clips);
}

inline double predict_video(const ModelParams& p, const FrameSequence& seq, std::size_t n_clips,
                            std::uint64_t seed) {
  io::sample_clip_start(seq.size(), p.features.n, p.features.tau, seed);  // length check
  features::VideoFeatureCache cache(seq, p.features);
  return predict_video(p, cache, seq.size(), n_clips, seed);
}

// ---------------------------------------------------------------------------
// Checkpoint: one JSON header line, then little-endian f32 w1, b1, w2, b2.

namespace detail {

inline std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

inline void put_f32(std::ostream& out, double v) {
  const auto bits = std::bit_cast<std::uint32_t>(static_cast<float>(v));
  const char b[4] = {static_cast<char>(bits & 0xff), static_cast<char>((bits >> 8) & 0xff),
                     static_cast<char>((bits >> 16) & 0xff), static_cast<char>(bits >> 24)};
  out.write(b, 4);
}

inline double get_f32(std::istream& in) {
  unsigned char b[4];
  if (!in.read(reinterpret_cast<char*>(b), 4)) throw TruncatedError("checkpoint weights truncated", 0);
  const std::uint32_t bits = b[0] | (b[1] << 8) | (b[2] << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
  return std::bit_cast<float>(bits);
}

}  // namespace detail

inline nlohmann::ordered_json feature_config_json(const features::FeatureConfig& c) {
  return {{"n", c.n}, {"tau", c.tau}, {"tau_b", c.tau_b}, {"grid", c.grid}, {"resize", c.resize}};
}

inline std::string config_hash(const features::FeatureConfig& c, std::size_t input_dim,
                               std::size_t hidden) {
  nlohmann::ordered_json j{{"features", feature_config_json(c)},
                           {"input_dim", input_dim},
                           {"hidden", hidden}};
  std::ostringstream s;
  s << std::hex << std::setw(16) << std::setfill('0') << detail::fnv1a(j.dump());
  return s.str();
}

inline void write_checkpoint(std::ostream& out, const ModelParams& p) {
  p.validate();
  const auto dims = features::FeatureDims::of(p.features);
  nlohmann::ordered_json h;
  h["format"] = "stabilitykit-mlp-1";
  h["dims"] = {{"c_o", dims.c_o}, {"c_s", dims.c_s}, {"c_b", dims.c_b},
               {"n", dims.n},     {"n_b", dims.n_b}, {"tau_b", dims.tau_b},
               {"input_dim", p.input_dim}, {"hidden", p.hidden}};
  h["features"] = feature_config_json(p.features);
  h["norm_stats"] = {{"mean", p.norm_mean}, {"std", p.norm_std}};
  h["config_hash"] = config_hash(p.features, p.input_dim, p.hidden);
  out << h.dump() << '\n';
  for (double w : p.w1) detail::put_f32(out, w);
  for (double w : p.b1) detail::put_f32(out, w);
  for (double w : p.w2) detail::put_f32(out, w);
  detail::put_f32(out, p.b2);
}

inline ModelParams read_checkpoint(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ParseError("checkpoint header missing");
  nlohmann::json h;
  try {
    h = nlohmann::json::parse(line);
    ModelParams p;
    const auto& f = h.at("features");
    p.features = {f.at("n").get<std::size_t>(), f.at("tau").get<std::size_t>(),
                  f.at("tau_b").get<std::size_t>(), f.at("grid").get<int>(),
                  f.at("resize").get<int>()};
    p.input_dim = h.at("dims").at("input_dim").get<std::size_t>();
    p.hidden = h.at("dims").at("hidden").get<std::size_t>();
    p.norm_mean = h.at("norm_stats").at("mean").get<std::vector<double>>();
    p.norm_std = h.at("norm_stats").at("std").get<std::vector<double>>();
    if (h.at("config_hash").get<std::string>() != config_hash(p.features, p.input_dim, p.hidden))
      throw ParseError("checkpoint config hash does not match its header");
    p.w1.resize(p.hidden * p.input_dim);
    p.b1.resize(p.hidden);
    p.w2.resize(p.hidden);
    for (auto& w : p.w1) w = detail::get_f32(in);
    for (auto& w : p.b1) w = detail::get_f32(in);
    for (auto& w : p.w2) w = detail::get_f32(in);
    p.b2 = detail::get_f32(in);
    p.validate();
    return p;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("checkpoint header: ") + e.what());
  }
}

inline void save_checkpoint(const std::filesystem::path& path, const ModelParams& p) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParseError("cannot write " + path.string());
  write_checkpoint(out, p);
}

inline ModelParams load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open checkpoint " + path.string());
  return read_checkpoint(in);
}

inline void write_train_log(std::ostream& out, const std::vector<EpochLog>& log) {
  out << "epoch,loss,val_srocc\n";
  for (const auto& e : log) {
    out << e.epoch << ',' << std::setprecision(6) << e.loss << ',';
    if (e.val_srocc) out << std::setprecision(6) << *e.val_srocc;
    out << '\n';
  }
}

}  // namespace stabilitykit::model
