#pragma once

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <vector>

#include "stabilitykit/csv.hpp"
#include "stabilitykit/error.hpp"
#include "stabilitykit/eval.hpp"
#include "stabilitykit/rng.hpp"

namespace stabilitykit::mos {

inline constexpr double kGoldenThreshold = 0.6;

struct Rating {
  std::size_t subject = 0;
  std::size_t video = 0;
  double score = 0;
  std::optional<std::string> session;
};

// Subject and video ids are interned in first-seen order.
class RatingsTable {
 public:
  void add(const std::string& subject, const std::string& video, double score,
           std::optional<std::string> session = std::nullopt) {
    if (!(score >= 0 && score <= 100))
      throw ParseError("rating " + std::to_string(score) + " outside [0, 100]");
    ratings_.push_back({intern(subjects_, subject_index_, subject), intern(videos_, video_index_, video),
                        score, std::move(session)});
  }

  const std::vector<std::string>& subjects() const { return subjects_; }
  const std::vector<std::string>& videos() const { return videos_; }
  const std::vector<Rating>& ratings() const { return ratings_; }

  // score[subject][video]; several ratings of the same pair are averaged.
  std::vector<std::vector<std::optional<double>>> matrix() const {
    std::vector<std::vector<double>> sum(subjects_.size(), std::vector<double>(videos_.size(), 0.0));
    std::vector<std::vector<int>> cnt(subjects_.size(), std::vector<int>(videos_.size(), 0));
    for (const auto& r : ratings_) {
      sum[r.subject][r.video] += r.score;
      ++cnt[r.subject][r.video];
    }
    std::vector<std::vector<std::optional<double>>> m(subjects_.size(),
                                                      std::vector<std::optional<double>>(videos_.size()));
    for (std::size_t s = 0; s < subjects_.size(); ++s)
      for (std::size_t v = 0; v < videos_.size(); ++v)
        if (cnt[s][v]) m[s][v] = sum[s][v] / cnt[s][v];
    return m;
  }

 private:
  static std::size_t intern(std::vector<std::string>& names, std::map<std::string, std::size_t>& index,
                            const std::string& name) {
    const auto [it, inserted] = index.emplace(name, names.size());
    if (inserted) names.push_back(name);
    return it->second;
  }

  std::vector<std::string> subjects_, videos_;
  std::map<std::string, std::size_t> subject_index_, video_index_;
  std::vector<Rating> ratings_;
};

// subject_id,video_id,score[,session]; an optional header line is skipped.
inline RatingsTable read_ratings(std::istream& in) {
  auto rows = csv::read_rows(in);
  csv::drop_header(rows, 2);
  RatingsTable t;
  for (const auto& r : rows) {
    if (r.fields.size() < 3 || r.fields.size() > 4)
      throw ParseError("line " + std::to_string(r.line_no) + ": expected 3 or 4 fields");
    std::optional<std::string> session;
    if (r.fields.size() == 4) session = r.fields[3];
    t.add(r.fields[0], r.fields[1], csv::require_double(r.fields[2], r.line_no), session);
  }
  if (t.ratings().empty()) throw EmptyInput("ratings file has no rows");
  return t;
}

struct MosResult {
  std::vector<std::string> videos;
  std::vector<double> mos;
  std::vector<double> std;
  std::vector<std::size_t> n;
  std::vector<std::string> rejected_subjects;
};

namespace detail {

inline MosResult aggregate(const RatingsTable& t, const std::vector<bool>& keep) {
  const auto m = t.matrix();
  MosResult r;
  r.videos = t.videos();
  for (std::size_t v = 0; v < t.videos().size(); ++v) {
    std::vector<double> xs;
    for (std::size_t s = 0; s < t.subjects().size(); ++s)
      if (keep[s] && m[s][v]) xs.push_back(*m[s][v]);
    if (xs.size() < 2)
      throw InsufficientRatings("video '" + t.videos()[v] + "' has " + std::to_string(xs.size()) +
                                " rating(s); at least 2 are required");
    r.mos.push_back(eval::mean(xs));
    r.std.push_back(eval::stddev(xs));
    r.n.push_back(xs.size());
  }
  for (std::size_t s = 0; s < t.subjects().size(); ++s)
    if (!keep[s]) r.rejected_subjects.push_back(t.subjects()[s]);
  return r;
}

}  // namespace detail

inline MosResult compute_mos(const RatingsTable& t) {
  return detail::aggregate(t, std::vector<bool>(t.subjects().size(), true));
}

enum class OutlierDenominator { kRatedVideos, kAllVideos };

struct RejectionOptions {
  double sigma_multiple = 2.0;
  double max_outlier_fraction = 0.05;
  OutlierDenominator denominator = OutlierDenominator::kRatedVideos;
};

inline MosResult reject_outlier_subjects(const RatingsTable& t, const RejectionOptions& opt = {}) {
  const auto first = compute_mos(t);
  const auto m = t.matrix();
  std::vector<bool> keep(t.subjects().size(), true);
  for (std::size_t s = 0; s < t.subjects().size(); ++s) {
    std::size_t outliers = 0, rated = 0;
    for (std::size_t v = 0; v < t.videos().size(); ++v) {
      if (!m[s][v]) continue;
      ++rated;
      if (std::abs(*m[s][v] - first.mos[v]) > opt.sigma_multiple * first.std[v]) ++outliers;
    }
    const double denom = static_cast<double>(
        opt.denominator == OutlierDenominator::kRatedVideos ? rated : t.videos().size());
    if (static_cast<double>(outliers) > opt.max_outlier_fraction * denom) keep[s] = false;
  }
  if (std::none_of(keep.begin(), keep.end(), [](bool k) { return k; }))
    throw EmptyAfterCleaning("every subject was rejected");
  return detail::aggregate(t, keep);
}

struct GoldenResult {
  double srocc = 0;
  bool flagged = false;
};

inline GoldenResult golden_check(std::span<const double> subject_ratings,
                                 std::span<const double> golden_mos,
                                 double threshold = kGoldenThreshold) {
  if (subject_ratings.size() < 3) throw InsufficientData("golden check needs at least 3 videos");
  const double r = eval::srocc(subject_ratings, golden_mos);
  return {r, r < threshold};
}

inline double repeated_check(std::span<const double> first, std::span<const double> second) {
  if (first.size() != second.size()) throw DimensionMismatch("repeated ratings differ in length");
  if (first.size() < 2) throw InsufficientData("repeated check needs at least 2 videos");
  return eval::rmse(first, second);
}

// Mean SROCC between MOS vectors of two disjoint random groups of n subjects,
// over videos rated by somebody in both groups. Repeat k shuffles the subjects
// with derive_seed(seed, k) and takes the groups from the two ends of that
// order, so a repeat's groups for n are nested inside its groups for n + 1.
inline double split_half(const RatingsTable& t, std::size_t n, std::size_t repeats,
                         std::uint64_t seed) {
  if (n < 1 || repeats < 1) throw ConfigError("split_half needs n >= 1 and repeats >= 1");
  if (t.subjects().size() < 2 * n)
    throw InsufficientData("split_half needs " + std::to_string(2 * n) + " subjects, have " +
                           std::to_string(t.subjects().size()));
  const auto m = t.matrix();
  std::vector<double> per_repeat;
  for (std::size_t k = 0; k < repeats; ++k) {
    Rng rng(derive_seed(seed, k));
    std::vector<std::size_t> ids(t.subjects().size());
    for (std::size_t i = 0; i < ids.size(); ++i) ids[i] = i;
    rng.shuffle(ids);
    std::vector<double> ga, gb;
    for (std::size_t v = 0; v < t.videos().size(); ++v) {
      double sa = 0, sb = 0;
      int ca = 0, cb = 0;
      for (std::size_t i = 0; i < n; ++i) {
        if (const auto& x = m[ids[i]][v]) sa += *x, ++ca;
        if (const auto& x = m[ids[ids.size() - 1 - i]][v]) sb += *x, ++cb;
      }
      if (ca && cb) {
        ga.push_back(sa / ca);
        gb.push_back(sb / cb);
      }
    }
    double r = 0;
    if (ga.size() >= 3) {
      const bool ca = std::all_of(ga.begin(), ga.end(), [&](double x) { return x == ga[0]; });
      const bool cb = std::all_of(gb.begin(), gb.end(), [&](double x) { return x == gb[0]; });
      if (ca && cb && ga == gb) r = 1.0;
      else if (!ca && !cb) r = eval::srocc(ga, gb);
    }
    per_repeat.push_back(r);
  }
  // Order-independent compensated sum.
  std::sort(per_repeat.begin(), per_repeat.end());
  double sum = 0, c = 0;
  for (double x : per_repeat) {
    const double y = x - c;
    const double s = sum + y;
    c = (s - sum) - y;
    sum = s;
  }
  return sum / static_cast<double>(per_repeat.size());
}

inline void write_mos_csv(std::ostream& out, const MosResult& r) {
  out << "video_id,mos,std,n\n";
  for (std::size_t v = 0; v < r.videos.size(); ++v)
    out << r.videos[v] << ',' << std::setprecision(6) << r.mos[v] << ',' << r.std[v] << ','
        << r.n[v] << '\n';
}

}  // namespace stabilitykit::mos
