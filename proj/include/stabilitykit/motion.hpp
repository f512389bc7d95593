#pragma once

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <optional>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "stabilitykit/error.hpp"
#include "stabilitykit/image.hpp"
#include "stabilitykit/rng.hpp"

namespace stabilitykit {

struct Point2 {
  double x = 0;
  double y = 0;
};

struct PointMatch {
  Point2 from;
  Point2 to;
};

// Dense motion sampled on a grid of cells; u/v are pixel displacements.
struct FlowField {
  int width = 0;
  int height = 0;
  std::vector<float> u;
  std::vector<float> v;

  FlowField() = default;
  FlowField(int w, int h) : width(w), height(h), u(static_cast<std::size_t>(w) * h), v(u.size()) {}
  std::size_t size() const noexcept { return u.size(); }
};

enum class MotionModel { kTranslation, kSimilarity, kHomography };

// Inter-frame motion in coordinates centred on the frame centre:
//   q - c = scale * R(theta) * (p - c) + (dx, dy)
// For homographies h maps centred p to centred q and dx/dy/theta/scale are
// read off its affine part.
struct MotionParams {
  MotionModel model = MotionModel::kSimilarity;
  double dx = 0;
  double dy = 0;
  double theta = 0;
  double scale = 1;
  std::array<double, 9> h{1, 0, 0, 0, 1, 0, 0, 0, 1};
  double inlier_ratio = 1;
};

// Camera path as prefix sums of per-pair motion; index 0 is the origin.
struct Trajectory {
  std::vector<double> x;
  std::vector<double> y;
  std::vector<double> theta;

  std::size_t length() const noexcept { return x.size(); }
  static Trajectory zeros(std::size_t n) {
    return {std::vector<double>(n), std::vector<double>(n), std::vector<double>(n)};
  }
};

namespace motion {

inline constexpr int kLkLevels = 3;
inline constexpr int kLkWindowRadius = 7;  // 15x15
inline constexpr int kLkMaxIterations = 30;
inline constexpr double kLkEpsilon = 0.01;
inline constexpr double kLkMaxRmsResidual = 20.0;
inline constexpr int kNmsRadius = 8;
inline constexpr std::size_t kMinCorners = 8;

struct RansacOptions {
  int iterations = 500;
  double inlier_px = 2.0;
  std::uint64_t seed = 0;
};

// ---------------------------------------------------------------------------
// Corners

// Minimum eigenvalue of the gradient structure tensor summed over a
// (2*block_radius+1)^2 window; Sobel gradients, replicated border.
inline Plane min_eigen_response(const Plane& img, int block_radius = 1) {
  Plane gxx(img.width, img.height), gxy(img.width, img.height), gyy(img.width, img.height);
  for (int y = 0; y < img.height; ++y)
    for (int x = 0; x < img.width; ++x) {
      const double gx = (img.clamped(x + 1, y - 1) + 2 * img.clamped(x + 1, y) +
                         img.clamped(x + 1, y + 1) - img.clamped(x - 1, y - 1) -
                         2 * img.clamped(x - 1, y) - img.clamped(x - 1, y + 1)) / 8.0;
      const double gy = (img.clamped(x - 1, y + 1) + 2 * img.clamped(x, y + 1) +
                         img.clamped(x + 1, y + 1) - img.clamped(x - 1, y - 1) -
                         2 * img.clamped(x, y - 1) - img.clamped(x + 1, y - 1)) / 8.0;
      gxx(x, y) = static_cast<float>(gx * gx);
      gxy(x, y) = static_cast<float>(gx * gy);
      gyy(x, y) = static_cast<float>(gy * gy);
    }
  Plane out(img.width, img.height);
  for (int y = 0; y < img.height; ++y)
    for (int x = 0; x < img.width; ++x) {
      double a = 0, b = 0, c = 0;
      for (int dy = -block_radius; dy <= block_radius; ++dy)
        for (int dx = -block_radius; dx <= block_radius; ++dx) {
          a += gxx.clamped(x + dx, y + dy);
          b += gxy.clamped(x + dx, y + dy);
          c += gyy.clamped(x + dx, y + dy);
        }
      const double half_tr = 0.5 * (a + c);
      const double disc = std::sqrt(std::max(0.0, 0.25 * (a - c) * (a - c) + b * b));
      out(x, y) = static_cast<float>(std::max(0.0, half_tr - disc));
    }
  return out;
}

// Shi-Tomasi corners, strongest first, with greedy suppression of anything
// closer than kNmsRadius to an accepted corner and quadratic sub-pixel refinement.
inline std::vector<Point2> detect_corners(const Plane& luma, std::size_t max_n, double quality) {
  if (luma.width < 32 || luma.height < 32) throw ConfigError("corner detection needs >= 32x32");
  const Plane r = min_eigen_response(luma);
  const double peak = *std::max_element(r.data.begin(), r.data.end());
  if (!(peak > 0)) throw DegenerateScene("no texture: corner response is zero everywhere");
  const double floor = quality * peak;
  const int border = kLkWindowRadius + 1;

  struct Candidate {
    float score;
    int x, y;
  };
  std::vector<Candidate> cand;
  for (int y = border; y < luma.height - border; ++y)
    for (int x = border; x < luma.width - border; ++x) {
      const float s = r(x, y);
      if (s < floor || s <= 0) continue;
      bool is_max = true;
      for (int dy = -1; dy <= 1 && is_max; ++dy)
        for (int dx = -1; dx <= 1; ++dx) {
          if ((dx || dy) && r(x + dx, y + dy) > s) {
            is_max = false;
            break;
          }
        }
      if (is_max) cand.push_back({s, x, y});
    }
  std::stable_sort(cand.begin(), cand.end(),
                   [](const Candidate& a, const Candidate& b) { return a.score > b.score; });

  std::vector<Point2> out;
  const double min_d2 = static_cast<double>(kNmsRadius) * kNmsRadius;
  for (const auto& c : cand) {
    if (out.size() >= max_n) break;
    bool keep = true;
    for (const auto& p : out) {
      const double dx = p.x - c.x, dy = p.y - c.y;
      if (dx * dx + dy * dy < min_d2) {
        keep = false;
        break;
      }
    }
    if (!keep) continue;
    auto refine = [](double m, double z, double p) {
      const double den = m - 2 * z + p;
      return den < 0 ? std::clamp(0.5 * (m - p) / den, -0.5, 0.5) : 0.0;
    };
    const double ox = refine(r(c.x - 1, c.y), r(c.x, c.y), r(c.x + 1, c.y));
    const double oy = refine(r(c.x, c.y - 1), r(c.x, c.y), r(c.x, c.y + 1));
    out.push_back({c.x + ox, c.y + oy});
  }
  if (out.size() < kMinCorners)
    throw DegenerateScene("only " + std::to_string(out.size()) + " corners found (need 8)");
  return out;
}

// ---------------------------------------------------------------------------
// Pyramidal Lucas-Kanade

struct PyramidLevel {
  Plane image;
  Plane gx;
  Plane gy;
};

using Pyramid = std::vector<PyramidLevel>;

inline Plane pyr_down(const Plane& src) {
  static const std::vector<double> k{1 / 16.0, 4 / 16.0, 6 / 16.0, 4 / 16.0, 1 / 16.0};
  const Plane s = convolve_separable(src, k);
  Plane out((src.width + 1) / 2, (src.height + 1) / 2);
  for (int y = 0; y < out.height; ++y)
    for (int x = 0; x < out.width; ++x) out(x, y) = s(2 * x, 2 * y);
  return out;
}

inline Pyramid build_pyramid(const Plane& luma, int levels = kLkLevels) {
  Pyramid pyr;
  Plane cur = luma;
  for (int l = 0; l < levels; ++l) {
    PyramidLevel lv;
    lv.gx = Plane(cur.width, cur.height);
    lv.gy = Plane(cur.width, cur.height);
    for (int y = 0; y < cur.height; ++y)
      for (int x = 0; x < cur.width; ++x) {
        lv.gx(x, y) = 0.5f * (cur.clamped(x + 1, y) - cur.clamped(x - 1, y));
        lv.gy(x, y) = 0.5f * (cur.clamped(x, y + 1) - cur.clamped(x, y - 1));
      }
    Plane next = l + 1 < levels ? pyr_down(cur) : Plane();
    lv.image = std::move(cur);
    pyr.push_back(std::move(lv));
    cur = std::move(next);
  }
  return pyr;
}

// Track one point; nullopt when the system is singular, the point leaves the
// image, or the final residual is too large.
inline std::optional<Point2> track_point(const Pyramid& prev, const Pyramid& next, Point2 p) {
  const int levels = static_cast<int>(prev.size());
  const int r = kLkWindowRadius;
  const int npix = (2 * r + 1) * (2 * r + 1);
  std::vector<double> win_i(npix), win_gx(npix), win_gy(npix);
  double gx_guess = 0, gy_guess = 0;

  for (int l = levels - 1; l >= 0; --l) {
    const auto& I = prev[l];
    const auto& J = next[l].image;
    const double s = std::ldexp(1.0, -l);
    const double px = p.x * s, py = p.y * s;

    double gxx = 0, gxy = 0, gyy = 0;
    for (int k = 0, dy = -r; dy <= r; ++dy)
      for (int dx = -r; dx <= r; ++dx, ++k) {
        win_i[k] = sample_bilinear(I.image, px + dx, py + dy);
        win_gx[k] = sample_bilinear(I.gx, px + dx, py + dy);
        win_gy[k] = sample_bilinear(I.gy, px + dx, py + dy);
        gxx += win_gx[k] * win_gx[k];
        gxy += win_gx[k] * win_gy[k];
        gyy += win_gy[k] * win_gy[k];
      }
    const double det = gxx * gyy - gxy * gxy;
    const double min_eig =
        0.5 * (gxx + gyy - std::sqrt((gxx - gyy) * (gxx - gyy) + 4 * gxy * gxy)) / npix;
    if (!(det > 0) || min_eig < 1e-3) return std::nullopt;

    double dxl = 0, dyl = 0;
    for (int it = 0; it < kLkMaxIterations; ++it) {
      double bx = 0, by = 0;
      const double qx = px + gx_guess + dxl, qy = py + gy_guess + dyl;
      for (int k = 0, dy = -r; dy <= r; ++dy)
        for (int dx = -r; dx <= r; ++dx, ++k) {
          const double diff = win_i[k] - sample_bilinear(J, qx + dx, qy + dy);
          bx += diff * win_gx[k];
          by += diff * win_gy[k];
        }
      const double ux = (gyy * bx - gxy * by) / det;
      const double uy = (gxx * by - gxy * bx) / det;
      dxl += ux;
      dyl += uy;
      if (ux * ux + uy * uy < kLkEpsilon * kLkEpsilon) break;
    }
    if (l > 0) {
      gx_guess = 2 * (gx_guess + dxl);
      gy_guess = 2 * (gy_guess + dyl);
    } else {
      gx_guess += dxl;
      gy_guess += dyl;
    }
  }

  const Point2 q{p.x + gx_guess, p.y + gy_guess};
  const auto& J0 = next[0].image;
  // Both windows must lie inside the image; clamped samples would bias the fit.
  auto inside = [&](Point2 a) {
    return std::isfinite(a.x) && std::isfinite(a.y) && a.x - r >= 0 && a.y - r >= 0 &&
           a.x + r <= J0.width - 1 && a.y + r <= J0.height - 1;
  };
  if (!inside(p) || !inside(q)) return std::nullopt;
  double ssd = 0;
  for (int dy = -r; dy <= r; ++dy)
    for (int dx = -r; dx <= r; ++dx) {
      const double d = sample_bilinear(prev[0].image, p.x + dx, p.y + dy) -
                       sample_bilinear(J0, q.x + dx, q.y + dy);
      ssd += d * d;
    }
  if (std::sqrt(ssd / npix) > kLkMaxRmsResidual) return std::nullopt;
  return q;
}

inline std::vector<std::optional<Point2>> track_points(const Pyramid& prev, const Pyramid& next,
                                                       std::span<const Point2> points) {
  std::vector<std::optional<Point2>> out;
  out.reserve(points.size());
  for (const auto& p : points) out.push_back(track_point(prev, next, p));
  return out;
}

inline std::vector<PointMatch> track_lk(const Pyramid& prev, const Pyramid& next,
                                        std::span<const Point2> points) {
  if (points.empty()) throw ConfigError("no points to track");
  std::vector<PointMatch> out;
  const auto tracked = track_points(prev, next, points);
  for (std::size_t i = 0; i < points.size(); ++i)
    if (tracked[i]) out.push_back({points[i], *tracked[i]});
  if (out.empty()) throw TrackingFailure("every tracked point was dropped");
  return out;
}

inline std::vector<PointMatch> track_lk(const Plane& prev, const Plane& next,
                                        std::span<const Point2> points) {
  if (!prev.same_shape(next)) throw DimensionMismatch("tracked planes differ in size");
  return track_lk(build_pyramid(prev), build_pyramid(next), points);
}

// ---------------------------------------------------------------------------
// Model fitting

namespace detail {

inline Point2 centred(Point2 p, Point2 c) { return {p.x - c.x, p.y - c.y}; }

inline MotionParams fit_translation(std::span<const PointMatch> m) {
  std::vector<double> dx, dy;
  for (const auto& pm : m) {
    dx.push_back(pm.to.x - pm.from.x);
    dy.push_back(pm.to.y - pm.from.y);
  }
  auto median = [](std::vector<double> v) {
    const std::size_t h = v.size() / 2;
    std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(h), v.end());
    const double hi = v[h];
    if (v.size() % 2) return hi;
    const double lo = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(h));
    return 0.5 * (lo + hi);
  };
  MotionParams p;
  p.model = MotionModel::kTranslation;
  p.dx = median(dx);
  p.dy = median(dy);
  p.h = {1, 0, p.dx, 0, 1, p.dy, 0, 0, 1};
  return p;
}

// Closed-form least squares for q = [a -b; b a] p + t (inputs already centred
// on the frame centre).
inline MotionParams fit_similarity(std::span<const PointMatch> m) {
  double mpx = 0, mpy = 0, mqx = 0, mqy = 0;
  for (const auto& pm : m) {
    mpx += pm.from.x;
    mpy += pm.from.y;
    mqx += pm.to.x;
    mqy += pm.to.y;
  }
  const double n = static_cast<double>(m.size());
  mpx /= n, mpy /= n, mqx /= n, mqy /= n;
  double sp = 0, sa = 0, sb = 0;
  for (const auto& pm : m) {
    const double px = pm.from.x - mpx, py = pm.from.y - mpy;
    const double qx = pm.to.x - mqx, qy = pm.to.y - mqy;
    sp += px * px + py * py;
    sa += px * qx + py * qy;
    sb += px * qy - py * qx;
  }
  MotionParams p;
  p.model = MotionModel::kSimilarity;
  const double a = sp > 0 ? sa / sp : 1.0;
  const double b = sp > 0 ? sb / sp : 0.0;
  p.dx = mqx - (a * mpx - b * mpy);
  p.dy = mqy - (b * mpx + a * mpy);
  p.theta = std::atan2(b, a);
  p.scale = std::hypot(a, b);
  p.h = {a, -b, p.dx, b, a, p.dy, 0, 0, 1};
  return p;
}

inline Point2 apply_h(const std::array<double, 9>& h, Point2 p) {
  const double w = h[6] * p.x + h[7] * p.y + h[8];
  return {(h[0] * p.x + h[1] * p.y + h[2]) / w, (h[3] * p.x + h[4] * p.y + h[5]) / w};
}

inline MotionParams from_homography(const std::array<double, 9>& h) {
  MotionParams p;
  p.model = MotionModel::kHomography;
  p.h = h;
  p.dx = h[2];
  p.dy = h[5];
  p.theta = std::atan2(h[3] - h[1], h[0] + h[4]);
  p.scale = std::sqrt(std::abs(h[0] * h[4] - h[1] * h[3]));
  return p;
}

// Hartley-normalised DLT; nullopt for degenerate configurations.
inline std::optional<std::array<double, 9>> dlt_homography(std::span<const PointMatch> m) {
  auto normaliser = [&](bool to) {
    double cx = 0, cy = 0;
    for (const auto& pm : m) {
      const auto& q = to ? pm.to : pm.from;
      cx += q.x;
      cy += q.y;
    }
    cx /= m.size();
    cy /= m.size();
    double d = 0;
    for (const auto& pm : m) {
      const auto& q = to ? pm.to : pm.from;
      d += std::hypot(q.x - cx, q.y - cy);
    }
    d /= m.size();
    const double s = d > 0 ? std::sqrt(2.0) / d : 1.0;
    Eigen::Matrix3d t;
    t << s, 0, -s * cx, 0, s, -s * cy, 0, 0, 1;
    return t;
  };
  const Eigen::Matrix3d tp = normaliser(false), tq = normaliser(true);
  Eigen::MatrixXd a(2 * m.size(), 9);
  for (std::size_t i = 0; i < m.size(); ++i) {
    const Eigen::Vector3d p = tp * Eigen::Vector3d(m[i].from.x, m[i].from.y, 1);
    const Eigen::Vector3d q = tq * Eigen::Vector3d(m[i].to.x, m[i].to.y, 1);
    a.row(2 * i) << -p.x(), -p.y(), -1, 0, 0, 0, q.x() * p.x(), q.x() * p.y(), q.x();
    a.row(2 * i + 1) << 0, 0, 0, -p.x(), -p.y(), -1, q.y() * p.x(), q.y() * p.y(), q.y();
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeFullV);
  const Eigen::VectorXd hv = svd.matrixV().col(8);
  Eigen::Matrix3d hn;
  hn << hv(0), hv(1), hv(2), hv(3), hv(4), hv(5), hv(6), hv(7), hv(8);
  const Eigen::Matrix3d h = tq.inverse() * hn * tp;
  if (!h.allFinite() || std::abs(h(2, 2)) < 1e-12) return std::nullopt;
  std::array<double, 9> out;
  for (int i = 0; i < 9; ++i) out[i] = h(i / 3, i % 3) / h(2, 2);
  return out;
}

// One Gauss-Newton step on the forward transfer error, h22 held at 1.
inline std::array<double, 9> refine_homography(const std::array<double, 9>& h,
                                               std::span<const PointMatch> m) {
  Eigen::Matrix<double, 8, 8> jtj = Eigen::Matrix<double, 8, 8>::Zero();
  Eigen::Matrix<double, 8, 1> jtr = Eigen::Matrix<double, 8, 1>::Zero();
  for (const auto& pm : m) {
    const double x = pm.from.x, y = pm.from.y;
    const double w = h[6] * x + h[7] * y + 1.0;
    const double u = (h[0] * x + h[1] * y + h[2]) / w;
    const double v = (h[3] * x + h[4] * y + h[5]) / w;
    Eigen::Matrix<double, 8, 1> ju, jv;
    ju << x / w, y / w, 1 / w, 0, 0, 0, -u * x / w, -u * y / w;
    jv << 0, 0, 0, x / w, y / w, 1 / w, -v * x / w, -v * y / w;
    jtj += ju * ju.transpose() + jv * jv.transpose();
    jtr += ju * (pm.to.x - u) + jv * (pm.to.y - v);
  }
  const Eigen::Matrix<double, 8, 1> delta = jtj.ldlt().solve(jtr);
  if (!delta.allFinite()) return h;
  std::array<double, 9> out = h;
  for (int i = 0; i < 8; ++i) out[i] += delta(i);
  out[8] = 1.0;
  return out;
}

inline std::size_t min_sample(MotionModel k) {
  switch (k) {
    case MotionModel::kTranslation: return 1;
    case MotionModel::kSimilarity: return 2;
    case MotionModel::kHomography: return 4;
  }
  return 1;
}

inline std::optional<MotionParams> fit_model(MotionModel k, std::span<const PointMatch> m) {
  switch (k) {
    case MotionModel::kTranslation: return fit_translation(m);
    case MotionModel::kSimilarity: return fit_similarity(m);
    case MotionModel::kHomography: {
      auto h = dlt_homography(m);
      if (!h) return std::nullopt;
      return from_homography(*h);
    }
  }
  return std::nullopt;
}

inline std::vector<std::size_t> inliers_of(const MotionParams& p, std::span<const PointMatch> m,
                                           double thr) {
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < m.size(); ++i) {
    const Point2 e = apply_h(p.h, m[i].from);
    if (std::hypot(e.x - m[i].to.x, e.y - m[i].to.y) <= thr) idx.push_back(i);
  }
  return idx;
}

}  // namespace detail

// Seeded RANSAC over matches expressed in frame-centred coordinates, followed
// by a least-squares refit on the consensus set.
inline MotionParams fit_motion_ransac(std::span<const PointMatch> matches, MotionModel kind,
                                      const RansacOptions& opt) {
  const std::size_t need = detail::min_sample(kind);
  if (matches.size() < need)
    throw UnderDetermined("need " + std::to_string(need) + " matches, have " +
                          std::to_string(matches.size()));
  Rng rng(opt.seed);
  std::vector<std::size_t> best;
  std::vector<PointMatch> sample(need);
  for (int it = 0; it < opt.iterations; ++it) {
    std::vector<std::size_t> pick;
    while (pick.size() < need) {
      const auto j = static_cast<std::size_t>(
          rng.uniform_int(0, static_cast<std::int64_t>(matches.size()) - 1));
      if (std::find(pick.begin(), pick.end(), j) == pick.end()) pick.push_back(j);
    }
    for (std::size_t s = 0; s < need; ++s) sample[s] = matches[pick[s]];
    const auto model = detail::fit_model(kind, sample);
    if (!model) continue;
    auto inl = detail::inliers_of(*model, matches, opt.inlier_px);
    if (inl.size() > best.size()) best = std::move(inl);
    if (best.size() == matches.size()) break;
  }
  if (best.size() < need) throw UnderDetermined("RANSAC found no consensus set");

  auto refit = [&](const std::vector<std::size_t>& idx) -> MotionParams {
    std::vector<PointMatch> in;
    for (auto i : idx) in.push_back(matches[i]);
    auto model = detail::fit_model(kind, in);
    if (!model) throw UnderDetermined("degenerate inlier set");
    if (kind == MotionModel::kHomography)
      model = detail::from_homography(detail::refine_homography(model->h, in));
    return *model;
  };
  MotionParams p = refit(best);
  auto final_inliers = detail::inliers_of(p, matches, opt.inlier_px);
  if (final_inliers.size() >= need && final_inliers != best) p = refit(final_inliers);
  else final_inliers = best;
  p.inlier_ratio = static_cast<double>(final_inliers.size()) / matches.size();
  return p;
}

// Per-frame data reused across the pairs a frame takes part in.
struct FrameFeatures {
  Pyramid pyramid;
  int width = 0;
  int height = 0;
};

inline FrameFeatures prepare_frame(const Frame& f) {
  return {build_pyramid(to_luma(f)), f.width(), f.height()};
}

inline constexpr std::size_t kMaxCorners = 300;
inline constexpr double kCornerQuality = 0.01;

inline MotionParams estimate_motion(const FrameFeatures& prev, const FrameFeatures& next,
                                    MotionModel kind, const RansacOptions& opt = {}) {
  if (prev.width != next.width || prev.height != next.height)
    throw DimensionMismatch("frames differ in size");
  const auto corners = detect_corners(prev.pyramid[0].image, kMaxCorners, kCornerQuality);
  const auto matches = track_lk(prev.pyramid, next.pyramid, corners);
  const Point2 c{(prev.width - 1) / 2.0, (prev.height - 1) / 2.0};
  std::vector<PointMatch> centred;
  centred.reserve(matches.size());
  for (const auto& m : matches)
    centred.push_back({detail::centred(m.from, c), detail::centred(m.to, c)});
  return fit_motion_ransac(centred, kind, opt);
}

inline MotionParams estimate_motion(const Frame& prev, const Frame& next, MotionModel kind,
                                    const RansacOptions& opt = {}) {
  if (prev.width() != next.width() || prev.height() != next.height())
    throw DimensionMismatch("frames differ in size");
  return estimate_motion(prepare_frame(prev), prepare_frame(next), kind, opt);
}

// ---------------------------------------------------------------------------
// Grid flow

inline FlowField grid_flow(const FrameFeatures& prev, const FrameFeatures& next, int grid) {
  if (grid < 4 || grid > 32) throw ConfigError("grid must be in [4, 32]");
  if (prev.width != next.width || prev.height != next.height)
    throw DimensionMismatch("frames differ in size");
  std::vector<Point2> seeds;
  for (int gy = 0; gy < grid; ++gy)
    for (int gx = 0; gx < grid; ++gx)
      seeds.push_back({(gx + 0.5) * prev.width / grid - 0.5, (gy + 0.5) * prev.height / grid - 0.5});
  const auto tracked = track_points(prev.pyramid, next.pyramid, seeds);

  std::vector<int> ok;
  for (std::size_t i = 0; i < tracked.size(); ++i)
    if (tracked[i]) ok.push_back(static_cast<int>(i));
  if (ok.empty()) throw TrackingFailure("no grid cell could be tracked");

  FlowField f(grid, grid);
  for (int i = 0; i < grid * grid; ++i) {
    int src = i;
    if (!tracked[i]) {
      // nearest tracked cell by grid distance; ties go to the lower index
      long best_d = std::numeric_limits<long>::max();
      for (int j : ok) {
        const long dx = i % grid - j % grid, dy = i / grid - j / grid;
        if (dx * dx + dy * dy < best_d) {
          best_d = dx * dx + dy * dy;
          src = j;
        }
      }
    }
    f.u[i] = static_cast<float>(tracked[src]->x - seeds[src].x);
    f.v[i] = static_cast<float>(tracked[src]->y - seeds[src].y);
  }
  return f;
}

inline FlowField grid_flow(const Frame& prev, const Frame& next, int grid) {
  if (prev.width() != next.width() || prev.height() != next.height())
    throw DimensionMismatch("frames differ in size");
  return grid_flow(prepare_frame(prev), prepare_frame(next), grid);
}

// ---------------------------------------------------------------------------
// Trajectories

inline Trajectory accumulate_trajectory(std::span<const MotionParams> params) {
  if (params.empty()) throw ConfigError("no motion parameters to accumulate");
  for (const auto& p : params)
    if (p.model != params.front().model) throw ConfigError("mixed motion models in one path");
  Trajectory t = Trajectory::zeros(params.size() + 1);
  for (std::size_t k = 0; k < params.size(); ++k) {
    t.x[k + 1] = t.x[k] + params[k].dx;
    t.y[k + 1] = t.y[k] + params[k].dy;
    t.theta[k + 1] = t.theta[k] + params[k].theta;
  }
  return t;
}

inline std::vector<MotionParams> estimate_pairwise(const FrameSequence& seq, MotionModel kind,
                                                   const RansacOptions& opt = {}) {
  if (seq.size() < 2) throw InsufficientFrames("motion needs at least 2 frames", 2);
  std::vector<MotionParams> out;
  FrameFeatures prev = prepare_frame(seq[0]);
  for (std::size_t k = 1; k < seq.size(); ++k) {
    FrameFeatures next = prepare_frame(seq[k]);
    RansacOptions o = opt;
    o.seed = derive_seed(opt.seed, k);
    out.push_back(estimate_motion(prev, next, kind, o));
    prev = std::move(next);
  }
  return out;
}

inline Trajectory estimate_trajectory(const FrameSequence& seq,
                                      MotionModel kind = MotionModel::kSimilarity,
                                      const RansacOptions& opt = {}) {
  const auto params = estimate_pairwise(seq, kind, opt);
  return accumulate_trajectory(params);
}

// CSV with columns frame,x,y,theta; fixed 6-decimal formatting.
inline void write_trajectory_csv(std::ostream& out, const Trajectory& t) {
  out << "frame,x,y,theta\n";
  std::ostringstream line;
  for (std::size_t k = 0; k < t.length(); ++k) {
    line.str("");
    line << std::fixed << std::setprecision(6) << k << ',' << t.x[k] << ',' << t.y[k] << ','
         << t.theta[k] << '\n';
    out << line.str();
  }
}

// Flow export: 8-byte magic "SKFLOW01", u32 width, u32 height (little endian),
// then width*height interleaved (u, v) little-endian f32 pairs, row-major.
inline void write_flow(std::ostream& out, const FlowField& f) {
  static_assert(std::endian::native == std::endian::little, "flow export assumes little endian");
  out.write("SKFLOW01", 8);
  const std::uint32_t w = static_cast<std::uint32_t>(f.width), h = static_cast<std::uint32_t>(f.height);
  out.write(reinterpret_cast<const char*>(&w), 4);
  out.write(reinterpret_cast<const char*>(&h), 4);
  for (std::size_t i = 0; i < f.size(); ++i) {
    out.write(reinterpret_cast<const char*>(&f.u[i]), 4);
    out.write(reinterpret_cast<const char*>(&f.v[i]), 4);
  }
}

inline FlowField read_flow(std::istream& in) {
  char magic[8];
  std::uint32_t w = 0, h = 0;
  in.read(magic, 8);
  in.read(reinterpret_cast<char*>(&w), 4);
  in.read(reinterpret_cast<char*>(&h), 4);
  if (!in || std::memcmp(magic, "SKFLOW01", 8) != 0) throw ParseError("bad flow header");
  FlowField f(static_cast<int>(w), static_cast<int>(h));
  for (std::size_t i = 0; i < f.size(); ++i) {
    in.read(reinterpret_cast<char*>(&f.u[i]), 4);
    in.read(reinterpret_cast<char*>(&f.v[i]), 4);
  }
  if (!in) throw TruncatedError("truncated flow payload", 0);
  return f;
}

}  // namespace motion
}  // namespace stabilitykit
