#pragma once

#include <cmath>
#include <vector>

namespace sk_test {

// Definitional oracles: explicit rank construction and pair enumeration.
inline double oracle_pearson(const std::vector<double>& a, const std::vector<double>& b) {
  const double n = static_cast<double>(a.size());
  double sa = 0, sb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) sa += a[i], sb += b[i];
  const double ma = sa / n, mb = sb / n;
  double c = 0, va = 0, vb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    c += (a[i] - ma) * (b[i] - mb);
    va += (a[i] - ma) * (a[i] - ma);
    vb += (b[i] - mb) * (b[i] - mb);
  }
  return c / std::sqrt(va * vb);
}

inline std::vector<double> oracle_ranks(const std::vector<double>& v) {
  std::vector<double> r(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    double less = 0, equal = 0;
    for (double w : v) less += w < v[i], equal += w == v[i];
    r[i] = less + (equal + 1) / 2.0;
  }
  return r;
}

inline double oracle_kendall_b(const std::vector<double>& a, const std::vector<double>& b) {
  double c = 0, d = 0, ta = 0, tb = 0, n0 = 0;
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = i + 1; j < a.size(); ++j) {
      n0 += 1;
      const double s = (a[i] - a[j]) * (b[i] - b[j]);
      if (a[i] == a[j]) ta += 1;
      if (b[i] == b[j]) tb += 1;
      if (s > 0) c += 1;
      if (s < 0) d += 1;
    }
  return (c - d) / std::sqrt((n0 - ta) * (n0 - tb));
}

}  // namespace sk_test
