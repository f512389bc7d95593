#include <gtest/gtest.h>

#include <map>
#include <sstream>

#include "mos_fixtures.hpp"

namespace {

using namespace stabilitykit;
using sk_test::table_from;

mos::RatingsTable one_video(const std::vector<double>& scores) {
  mos::RatingsTable t;
  for (std::size_t i = 0; i < scores.size(); ++i) t.add("s" + std::to_string(i), "v", scores[i]);
  return t;
}

TEST(ComputeMos, Examples) {
  auto r = mos::compute_mos(one_video({40, 60}));
  EXPECT_DOUBLE_EQ(r.mos[0], 50.0);
  EXPECT_DOUBLE_EQ(r.std[0], 10.0);
  EXPECT_EQ(r.n[0], 2u);
  r = mos::compute_mos(one_video({70, 70, 70}));
  EXPECT_DOUBLE_EQ(r.mos[0], 70.0);
  EXPECT_DOUBLE_EQ(r.std[0], 0.0);
  r = mos::compute_mos(one_video({10, 20, 30, 40}));
  EXPECT_DOUBLE_EQ(r.mos[0], 25.0);
  EXPECT_NEAR(r.std[0], std::sqrt(125.0), 1e-12);
  EXPECT_NEAR(r.std[0], 11.1803, 1e-4);
  EXPECT_TRUE(r.rejected_subjects.empty());
}

TEST(ComputeMos, TooFewRatings) {
  EXPECT_THROW(mos::compute_mos(one_video({55})), InsufficientRatings);
  mos::RatingsTable t;
  t.add("a", "v1", 10);
  t.add("b", "v1", 20);
  t.add("a", "v2", 30);
  EXPECT_THROW(mos::compute_mos(t), InsufficientRatings);
}

TEST(ComputeMos, InvariantToRatingOrder) {
  auto rows = sk_test::planted_outlier_rows(3);
  const auto a = mos::compute_mos(table_from(rows));
  Rng r(4);
  r.shuffle(rows);
  const auto b = mos::compute_mos(table_from(rows));
  std::map<std::string, std::pair<double, double>> by_id;
  for (std::size_t v = 0; v < a.videos.size(); ++v) by_id[a.videos[v]] = {a.mos[v], a.std[v]};
  ASSERT_EQ(b.videos.size(), a.videos.size());
  for (std::size_t v = 0; v < b.videos.size(); ++v) {
    EXPECT_NEAR(by_id[b.videos[v]].first, b.mos[v], 1e-12);
    EXPECT_NEAR(by_id[b.videos[v]].second, b.std[v], 1e-12);
  }
}

TEST(RatingsTable, RangeAndDuplicates) {
  mos::RatingsTable t;
  EXPECT_THROW(t.add("a", "v", 100.5), ParseError);
  EXPECT_THROW(t.add("a", "v", -1), ParseError);
  EXPECT_THROW(t.add("a", "v", std::nan("")), ParseError);
  t.add("a", "v", 20, "s1");
  t.add("a", "v", 40, "s2");
  t.add("b", "v", 60);
  const auto r = mos::compute_mos(t);
  EXPECT_DOUBLE_EQ(r.mos[0], 45.0);
  EXPECT_EQ(r.n[0], 2u);
}

TEST(ReadRatings, HeaderSessionsAndErrors) {
  std::istringstream in("subject_id,video_id,score,session\n# comment\na,v1,40,1\nb,v1,60,2\n\n");
  const auto t = mos::read_ratings(in);
  EXPECT_EQ(t.subjects(), (std::vector<std::string>{"a", "b"}));
  ASSERT_EQ(t.ratings().size(), 2u);
  EXPECT_EQ(*t.ratings()[1].session, "2");
  std::istringstream bad("a,v1,40\nb,v1\n");
  EXPECT_THROW(mos::read_ratings(bad), ParseError);
  std::istringstream range("a,v1,140\n");
  EXPECT_THROW(mos::read_ratings(range), ParseError);
  std::istringstream word("a,v1,40\nb,v1,high\n");
  EXPECT_THROW(mos::read_ratings(word), ParseError);
  std::istringstream empty("subject_id,video_id,score\n");
  EXPECT_THROW(mos::read_ratings(empty), EmptyInput);
}

TEST(Rejection, PlantedSubjectIsRejected) {
  for (std::uint64_t seed : {1, 2, 3, 4, 5}) {
    const auto r = mos::reject_outlier_subjects(table_from(sk_test::planted_outlier_rows(seed)));
    EXPECT_EQ(r.rejected_subjects, std::vector<std::string>{"planted"}) << seed;
    for (auto n : r.n) EXPECT_EQ(n, 10u);
  }
}

TEST(Rejection, CleanPanelAndIdenticalRatings) {
  EXPECT_TRUE(mos::reject_outlier_subjects(table_from(sk_test::planted_outlier_rows(1, false)))
                  .rejected_subjects.empty());
  mos::RatingsTable same;
  for (int s = 0; s < 5; ++s)
    for (int v = 0; v < 4; ++v) same.add("s" + std::to_string(s), "v" + std::to_string(v), 10.0 * v + 5);
  const auto r = mos::reject_outlier_subjects(same);
  EXPECT_TRUE(r.rejected_subjects.empty());
  EXPECT_DOUBLE_EQ(r.mos[2], 25.0);
}

// Ten subjects agree at 50 on 20 videos; subject "x" rates 90 on `off` of them.
mos::RatingsTable boundary_table(int off) {
  mos::RatingsTable t;
  for (int s = 0; s < 10; ++s)
    for (int v = 0; v < 20; ++v) t.add("s" + std::to_string(s), "v" + std::to_string(v), 50);
  for (int v = 0; v < 20; ++v) t.add("x", "v" + std::to_string(v), v < off ? 90 : 50);
  return t;
}

TEST(Rejection, FivePercentBoundaryIsStrict) {
  EXPECT_TRUE(mos::reject_outlier_subjects(boundary_table(1)).rejected_subjects.empty());
  EXPECT_EQ(mos::reject_outlier_subjects(boundary_table(2)).rejected_subjects,
            std::vector<std::string>{"x"});
}

TEST(Rejection, DenominatorSwitch) {
  // "x" rated only 10 of the 20 videos and is off on one of them.
  mos::RatingsTable t;
  for (int s = 0; s < 10; ++s)
    for (int v = 0; v < 20; ++v) t.add("s" + std::to_string(s), "v" + std::to_string(v), 50);
  for (int v = 0; v < 10; ++v) t.add("x", "v" + std::to_string(v), v == 0 ? 90 : 50);
  EXPECT_EQ(mos::reject_outlier_subjects(t).rejected_subjects, std::vector<std::string>{"x"});
  mos::RejectionOptions all;
  all.denominator = mos::OutlierDenominator::kAllVideos;
  EXPECT_TRUE(mos::reject_outlier_subjects(t, all).rejected_subjects.empty());
}

TEST(Rejection, UntouchedVideosKeepTheirMos) {
  auto rows = sk_test::planted_outlier_rows(6);
  // Videos v20..v24 are rated only by honest subjects.
  Rng r(6);
  for (int s = 0; s < 10; ++s)
    for (int v = 20; v < 25; ++v) rows.push_back({"s" + std::to_string(s), "v" + std::to_string(v), r.uniform(0, 100)});
  const auto t = table_from(rows);
  const auto before = mos::compute_mos(t), after = mos::reject_outlier_subjects(t);
  ASSERT_EQ(after.rejected_subjects, std::vector<std::string>{"planted"});
  for (std::size_t v = 20; v < 25; ++v) EXPECT_EQ(after.mos[v], before.mos[v]);
  const auto again = mos::reject_outlier_subjects(t);
  EXPECT_EQ(again.rejected_subjects, after.rejected_subjects);
  EXPECT_EQ(again.mos, after.mos);
}

TEST(Rejection, EverybodyRejected) {
  mos::RatingsTable t;
  mos::RejectionOptions harsh;
  harsh.sigma_multiple = 0.1;
  harsh.max_outlier_fraction = 0.0;
  t.add("a", "v", 0);
  t.add("b", "v", 100);
  EXPECT_THROW(mos::reject_outlier_subjects(t, harsh), EmptyAfterCleaning);
}

TEST(Golden, OrderAndReversal) {
  const std::vector<double> g{10, 30, 50, 70, 90};
  const auto same = mos::golden_check(std::vector<double>{1, 2, 3, 4, 5}, g);
  EXPECT_DOUBLE_EQ(same.srocc, 1.0);
  EXPECT_FALSE(same.flagged);
  const auto rev = mos::golden_check(std::vector<double>{5, 4, 3, 2, 1}, g);
  EXPECT_DOUBLE_EQ(rev.srocc, -1.0);
  EXPECT_TRUE(rev.flagged);
  EXPECT_THROW(mos::golden_check(std::vector<double>{1, 2}, std::vector<double>{1, 2}), InsufficientData);
}

TEST(Golden, HonestRaterPopulationIsPlausible) {
  Rng r(12);
  std::vector<double> golden(10);
  for (auto& g : golden) g = r.uniform(0, 100);
  double sum = 0;
  const int raters = 300;
  for (int k = 0; k < raters; ++k) {
    std::vector<double> s;
    for (double g : golden) s.push_back(g + r.normal(0, 5));
    sum += mos::golden_check(s, golden).srocc;
  }
  const double mean = sum / raters;
  EXPECT_GE(mean, 0.8);
  EXPECT_LE(mean, 1.0);
}

TEST(Repeated, Examples) {
  const std::vector<double> a{10, 50, 80, 20, 65};
  EXPECT_DOUBLE_EQ(mos::repeated_check(a, a), 0.0);
  std::vector<double> b;
  for (double v : a) b.push_back(v + 8);
  EXPECT_NEAR(mos::repeated_check(a, b), 8.0, 1e-12);
  EXPECT_THROW(mos::repeated_check(a, std::vector<double>{1, 2}), DimensionMismatch);
}

TEST(Repeated, IndependentNoiseMonteCarlo) {
  Rng r(13);
  std::vector<double> a(100000), b(100000);
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double latent = r.uniform(20, 80);
    a[i] = latent + r.normal(0, 8);
    b[i] = latent + r.normal(0, 8);
  }
  EXPECT_NEAR(mos::repeated_check(a, b), 8 * std::sqrt(2.0), 0.1);
}

TEST(SplitHalf, ClonesGiveOne) {
  mos::RatingsTable t;
  for (int s = 0; s < 6; ++s)
    for (int v = 0; v < 8; ++v) t.add("s" + std::to_string(s), "v" + std::to_string(v), 11.0 * v + 3);
  for (std::size_t n : {1u, 2u, 3u}) EXPECT_DOUBLE_EQ(mos::split_half(t, n, 20, 1), 1.0);
}

TEST(SplitHalf, TrendAndBounds) {
  const auto t = sk_test::simulated_panel(20, 60, 15, 21);
  double prev = -2;
  std::vector<double> gains;
  for (std::size_t n = 1; n <= 8; ++n) {
    const double v = mos::split_half(t, n, 100, 9);
    EXPECT_GE(v, -1.0);
    EXPECT_LE(v, 1.0);
    EXPECT_GE(v, prev) << n;
    if (n > 1) gains.push_back(v - prev);
    prev = v;
  }
  EXPECT_LT(gains.back(), gains.front());
}

TEST(SplitHalf, DeterministicAndChecked) {
  const auto t = sk_test::simulated_panel(10, 20, 10, 2);
  EXPECT_EQ(mos::split_half(t, 3, 100, 5), mos::split_half(t, 3, 100, 5));
  EXPECT_EQ(mos::split_half(t, 3, 1, 5), mos::split_half(t, 3, 1, 5));
  EXPECT_THROW(mos::split_half(t, 6, 10, 5), InsufficientData);
  EXPECT_THROW(mos::split_half(t, 2, 0, 5), ConfigError);
}

TEST(MosCsv, Layout) {
  std::ostringstream out;
  mos::write_mos_csv(out, mos::compute_mos(one_video({10, 20, 30, 40})));
  EXPECT_EQ(out.str(), "video_id,mos,std,n\nv,25,11.1803,4\n");
}

}  // namespace
