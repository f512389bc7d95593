#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <numeric>
#include <span>
#include <vector>

#include "stabilitykit/error.hpp"

namespace stabilitykit::eval {

struct MetricReport {
  double srocc = 0;
  double plcc = 0;
  double krcc = 0;
  double rmse = 0;
  std::array<double, 4> logistic_beta{};
};

namespace detail {

inline void require_pair(std::span<const double> a, std::span<const double> b, std::size_t min_n,
                         const char* what) {
  if (a.size() != b.size()) throw DimensionMismatch(std::string(what) + ": lengths differ");
  if (a.size() < min_n)
    throw InsufficientData(std::string(what) + ": needs at least " + std::to_string(min_n) +
                           " values");
}

inline bool is_constant(std::span<const double> v) {
  return std::all_of(v.begin(), v.end(), [&](double x) { return x == v.front(); });
}

}  // namespace detail

inline double mean(std::span<const double> v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

// Population standard deviation.
inline double stddev(std::span<const double> v) {
  const double m = mean(v);
  double s = 0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(v.size()));
}

inline double median(std::vector<double> v) {
  if (v.empty()) throw EmptyInput("median of nothing");
  std::sort(v.begin(), v.end());
  const std::size_t h = v.size() / 2;
  return v.size() % 2 ? v[h] : 0.5 * (v[h - 1] + v[h]);
}

inline double pearson(std::span<const double> a, std::span<const double> b) {
  detail::require_pair(a, b, 2, "pearson");
  const double ma = mean(a), mb = mean(b);
  double sab = 0, saa = 0, sbb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  if (saa == 0 || sbb == 0) throw DegenerateInput("pearson: constant input");
  return std::clamp(sab / std::sqrt(saa * sbb), -1.0, 1.0);
}

// 1-based fractional ranks; tied values share the mean of their positions.
inline std::vector<double> average_ranks(std::span<const double> v) {
  std::vector<std::size_t> idx(v.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t i, std::size_t j) { return v[i] < v[j]; });
  std::vector<double> ranks(v.size());
  for (std::size_t s = 0; s < idx.size();) {
    std::size_t e = s + 1;
    while (e < idx.size() && v[idx[e]] == v[idx[s]]) ++e;
    const double r = 0.5 * static_cast<double>(s + 1 + e);  // mean of s+1 .. e
    for (std::size_t k = s; k < e; ++k) ranks[idx[k]] = r;
    s = e;
  }
  return ranks;
}

inline double srocc(std::span<const double> a, std::span<const double> b) {
  detail::require_pair(a, b, 3, "srocc");
  if (detail::is_constant(a) || detail::is_constant(b))
    throw DegenerateInput("srocc: constant input");
  const auto ra = average_ranks(a), rb = average_ranks(b);
  return pearson(ra, rb);
}

// Kendall tau-b.
inline double krcc(std::span<const double> a, std::span<const double> b) {
  detail::require_pair(a, b, 3, "krcc");
  const std::size_t n = a.size();
  double concordant = 0, discordant = 0, tied_a = 0, tied_b = 0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      const double da = a[i] - a[j], db = b[i] - b[j];
      if (da == 0) tied_a += 1;
      if (db == 0) tied_b += 1;
      if (da == 0 || db == 0) continue;
      ((da > 0) == (db > 0) ? concordant : discordant) += 1;
    }
  const double n0 = static_cast<double>(n) * (n - 1) / 2.0;
  const double denom = std::sqrt((n0 - tied_a) * (n0 - tied_b));
  if (denom == 0) throw DegenerateInput("krcc: all values tied");
  return std::clamp((concordant - discordant) / denom, -1.0, 1.0);
}

inline double rmse(std::span<const double> a, std::span<const double> b) {
  detail::require_pair(a, b, 1, "rmse");
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s / static_cast<double>(a.size()));
}

// ---------------------------------------------------------------------------
// Nelder-Mead

struct NelderMeadOptions {
  double diameter_tol = 1e-8;
  int max_iterations = 2000;
};

struct NelderMeadResult {
  std::vector<double> x;
  double value = 0;
  int iterations = 0;
};

// Standard reflection/expansion/contraction/shrink (1, 2, 1/2, 1/2). The
// simplex is rebuilt around the best vertex whenever it collapses early, until
// a restart brings no improvement or the iteration budget is spent.
inline NelderMeadResult nelder_mead(const std::function<double(std::span<const double>)>& f,
                                    std::vector<double> x0, std::vector<double> step,
                                    const NelderMeadOptions& opt = {}) {
  const std::size_t n = x0.size();
  int iterations = 0;
  double best_value = f(x0);
  for (int restart = 0; restart < 8 && iterations < opt.max_iterations; ++restart) {
    std::vector<std::vector<double>> s(n + 1, x0);
    std::vector<double> fv(n + 1);
    for (std::size_t i = 0; i < n; ++i) s[i + 1][i] += step[i];
    for (std::size_t i = 0; i <= n; ++i) fv[i] = f(s[i]);

    std::vector<std::size_t> order(n + 1);
    auto sort_simplex = [&] {
      std::iota(order.begin(), order.end(), 0);
      std::stable_sort(order.begin(), order.end(), [&](auto i, auto j) { return fv[i] < fv[j]; });
      std::vector<std::vector<double>> s2;
      std::vector<double> f2;
      for (auto i : order) {
        s2.push_back(s[i]);
        f2.push_back(fv[i]);
      }
      s = std::move(s2);
      fv = std::move(f2);
    };
    auto diameter = [&] {
      double d = 0;
      for (std::size_t i = 1; i <= n; ++i) {
        double e = 0;
        for (std::size_t k = 0; k < n; ++k) e += (s[i][k] - s[0][k]) * (s[i][k] - s[0][k]);
        d = std::max(d, std::sqrt(e));
      }
      return d;
    };
    auto along = [&](const std::vector<double>& c, const std::vector<double>& p, double t) {
      std::vector<double> out(n);
      for (std::size_t k = 0; k < n; ++k) out[k] = c[k] + t * (p[k] - c[k]);
      return out;
    };

    sort_simplex();
    while (iterations < opt.max_iterations && diameter() >= opt.diameter_tol) {
      ++iterations;
      std::vector<double> c(n, 0.0);
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t k = 0; k < n; ++k) c[k] += s[i][k] / static_cast<double>(n);
      const auto xr = along(c, s[n], -1.0);
      const double fr = f(xr);
      if (fr < fv[0]) {
        const auto xe = along(c, s[n], -2.0);
        const double fe = f(xe);
        if (fe < fr) s[n] = xe, fv[n] = fe;
        else s[n] = xr, fv[n] = fr;
      } else if (fr < fv[n - 1]) {
        s[n] = xr, fv[n] = fr;
      } else {
        const bool outside = fr < fv[n];
        const auto xc = outside ? along(c, xr, 0.5) : along(c, s[n], 0.5);
        const double fc = f(xc);
        if (fc < (outside ? fr : fv[n])) {
          s[n] = xc, fv[n] = fc;
        } else {
          for (std::size_t i = 1; i <= n; ++i) {
            s[i] = along(s[0], s[i], 0.5);
            fv[i] = f(s[i]);
          }
        }
      }
      sort_simplex();
    }
    const bool improved = fv[0] < best_value;
    x0 = s[0];
    best_value = std::min(best_value, fv[0]);
    if (!improved && restart > 0) break;
    for (std::size_t k = 0; k < n; ++k) step[k] *= 0.5;
  }
  return {x0, best_value, iterations};
}

// ---------------------------------------------------------------------------
// Four-parameter logistic mapping

inline double logistic4(std::span<const double> beta, double x) {
  const double z = std::clamp(-(x - beta[2]) / beta[3], -700.0, 700.0);
  return (beta[0] - beta[1]) / (1.0 + std::exp(z)) + beta[1];
}

struct LogisticFit {
  std::array<double, 4> beta{};
  std::vector<double> mapped;
  double sse = 0;
};

inline LogisticFit logistic_fit(std::span<const double> pred, std::span<const double> mos) {
  detail::require_pair(pred, mos, 5, "logistic_fit");
  if (detail::is_constant(pred)) throw DegenerateInput("logistic_fit: constant predictions");
  auto sse = [&](std::span<const double> beta) {
    if (!(std::abs(beta[3]) > 1e-12)) return 1e300;
    double s = 0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
      const double d = logistic4(beta, pred[i]) - mos[i];
      s += d * d;
    }
    return std::isfinite(s) ? s : 1e300;
  };
  const auto [lo, hi] = std::minmax_element(mos.begin(), mos.end());
  const double p_std = stddev(pred);
  std::vector<double> x0{*hi, *lo, median({pred.begin(), pred.end()}), std::max(p_std / 4.0, 1e-6)};
  const double range = std::max(*hi - *lo, 1e-6);
  std::vector<double> step{0.1 * range, 0.1 * range, 0.5 * p_std, 0.5 * x0[3]};
  const auto nm = nelder_mead(sse, x0, step);

  LogisticFit r;
  std::copy(nm.x.begin(), nm.x.end(), r.beta.begin());
  r.sse = nm.value;
  for (double p : pred) r.mapped.push_back(logistic4(r.beta, p));
  return r;
}

// Argument order matters: pred first, mos second. Rank correlations use the
// raw predictions; PLCC and RMSE use the logistic-mapped predictions.
inline MetricReport evaluate(std::span<const double> pred, std::span<const double> mos) {
  detail::require_pair(pred, mos, 5, "evaluate");
  MetricReport r;
  r.srocc = srocc(pred, mos);
  r.krcc = krcc(pred, mos);
  const auto fit = logistic_fit(pred, mos);
  r.logistic_beta = fit.beta;
  r.plcc = detail::is_constant(fit.mapped) ? 0.0 : pearson(fit.mapped, mos);
  r.rmse = rmse(fit.mapped, mos);
  return r;
}

}  // namespace stabilitykit::eval
