#include <gtest/gtest.h>

#include <numbers>
#include <nlohmann/json.hpp>

#include "cli_runner.hpp"
#include "mos_fixtures.hpp"

namespace {

using namespace stabilitykit;
using sk_test::run_cli;
using sk_test::slurp;
using Json = nlohmann::json;
namespace fs = std::filesystem;

constexpr int kOut = 96, kMargin = 24;

fs::path write_video(const fs::path& dir, const std::string& name, const Trajectory& t) {
  const auto base = synth::gen_base_image(kOut + 2 * kMargin, kOut + 2 * kMargin, 7);
  const auto path = dir / (name + ".y4m");
  io::save_y4m(path, synth::render_shaky(base, t, kOut));
  return path;
}

// Bin-10 horizontal jitter of the given amplitude over 32 frames.
Trajectory jitter(double amplitude) {
  Trajectory t = Trajectory::zeros(32);
  for (std::size_t k = 0; k < 32; ++k) t.x[k] = amplitude * std::sin(2 * std::numbers::pi * 10 * k / 32.0);
  return t;
}

// frame,x,y,theta rows after the header.
Trajectory read_csv_trajectory(std::istream& in) {
  Trajectory t;
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "frame,x,y,theta");
  while (std::getline(in, line)) {
    double f, x, y, th;
    EXPECT_EQ(std::sscanf(line.c_str(), "%lf,%lf,%lf,%lf", &f, &x, &y, &th), 4) << line;
    EXPECT_EQ(f, static_cast<double>(t.length()));
    t.x.push_back(x);
    t.y.push_back(y);
    t.theta.push_back(th);
  }
  return t;
}

Json parse(const sk_test::CliResult& r) {
  EXPECT_EQ(r.exit_code, 0) << r.err;
  return Json::parse(r.out);
}

// Ten short labelled videos written by the synth command.
const fs::path& small_dataset() {
  static const fs::path dir = [] {
    const auto d = sk_test::scratch_dir("cli_small_dataset");
    std::ofstream(d / "synth.json") << R"({"count": 10, "ladder": [0, 2, 4, 8], "length": 24,
                                          "out_size": 64, "margin": 24, "seed": 3})";
    const auto r = run_cli({"synth", "-o", (d / "data").string(), "--config", (d / "synth.json").string()});
    EXPECT_EQ(r.exit_code, 0) << r.err;
    std::ofstream(d / "train.json") << R"({"n": 8, "tau": 2, "tau_b": 4, "grid": 4, "resize": 32,
                                          "epochs": 3, "batch_size": 2})";
    return d;
  }();
  return dir;
}

TEST(CliScore, StaticVideoIsPerfectlyStable) {
  const auto dir = sk_test::scratch_dir("cli_score_static");
  const auto j = parse(run_cli({"score", write_video(dir, "static", Trajectory::zeros(32)).string()}));
  EXPECT_DOUBLE_EQ(j["stability"]["score"].get<double>(), 1.0);
  EXPECT_DOUBLE_EQ(j["itf_db"].get<double>(), 100.0);
  EXPECT_EQ(j["frames"].get<int>(), 32);
  EXPECT_EQ(j["width"].get<int>(), kOut);
  EXPECT_FALSE(j.contains("prediction"));
}

TEST(CliScore, StrongJitterScoresBelowMildJitter) {
  const auto dir = sk_test::scratch_dir("cli_score_jitter");
  const auto mild = parse(run_cli({"score", write_video(dir, "j1", jitter(1)).string()}));
  const auto strong = parse(run_cli({"score", write_video(dir, "j8", jitter(8)).string()}));
  EXPECT_LT(strong["stability"]["score"].get<double>(), mild["stability"]["score"].get<double>());
  EXPECT_LT(strong["itf_db"].get<double>(), mild["itf_db"].get<double>());
}

TEST(CliScore, ErrorsMapToExitCodes) {
  const auto dir = sk_test::scratch_dir("cli_score_errors");
  EXPECT_EQ(run_cli({"score", (dir / "missing.y4m").string()}).exit_code, 2);
  const auto video = write_video(dir, "static", Trajectory::zeros(20));
  const auto r = run_cli({"score", video.string(), "--checkpoint", (dir / "none.ckpt").string()});
  EXPECT_EQ(r.exit_code, 3);
  EXPECT_NE(r.err.find("checkpoint"), std::string::npos);
  EXPECT_EQ(run_cli({"score", video.string(), "--model", "affine"}).exit_code, 2);
  EXPECT_EQ(run_cli({"score"}).exit_code, 2);
  EXPECT_EQ(run_cli({"--help"}).exit_code, 0);
}

TEST(CliTrajectory, StaticVideoGivesZeroColumns) {
  const auto dir = sk_test::scratch_dir("cli_traj_static");
  const auto r = run_cli({"trajectory", write_video(dir, "static", Trajectory::zeros(16)).string()});
  ASSERT_EQ(r.exit_code, 0) << r.err;
  std::istringstream in(r.out);
  const auto t = read_csv_trajectory(in);
  ASSERT_EQ(t.length(), 16u);
  for (std::size_t k = 0; k < 16; ++k) {
    EXPECT_NEAR(t.x[k], 0, 1e-6);
    EXPECT_NEAR(t.y[k], 0, 1e-6);
    EXPECT_NEAR(t.theta[k], 0, 1e-6);
  }
}

TEST(CliTrajectory, PanFollowsOnePixelPerFrame) {
  const auto dir = sk_test::scratch_dir("cli_traj_pan");
  Trajectory pan = Trajectory::zeros(20);
  for (std::size_t k = 0; k < 20; ++k) pan.x[k] = static_cast<double>(k);
  const auto csv = dir / "pan.csv", plot = dir / "pan.dat";
  const auto r = run_cli({"trajectory", write_video(dir, "pan", pan).string(), "-o", csv.string(), "--plot",
                          plot.string()});
  ASSERT_EQ(r.exit_code, 0) << r.err;
  std::ifstream in(csv);
  const auto t = read_csv_trajectory(in);
  ASSERT_EQ(t.length(), 20u);
  for (std::size_t k = 0; k < 20; ++k) EXPECT_NEAR(t.x[k], static_cast<double>(k), 0.25) << k;
  const auto dat = slurp(plot);
  EXPECT_EQ(dat.rfind("# frame x y theta\n", 0), 0u);
  EXPECT_EQ(std::count(dat.begin(), dat.end(), '\n'), 21);
}

TEST(CliTrajectory, TexturelessVideoExitsFour) {
  const auto dir = sk_test::scratch_dir("cli_traj_flat");
  FrameSequence flat(std::vector<Frame>(12, sk_test::gray_frame(64, 64, 128)), 30.0);
  io::save_y4m(dir / "flat.y4m", flat);
  EXPECT_EQ(run_cli({"trajectory", (dir / "flat.y4m").string()}).exit_code, 4);
  EXPECT_EQ(run_cli({"score", (dir / "flat.y4m").string()}).exit_code, 4);
}

TEST(CliTrain, TooFewVideosExitsFive) {
  const auto& d = small_dataset();
  std::ofstream(d / "three.csv") << "video_id,path,gt_score\n"
                                 << "a,data/video_0000.y4m,90\nb,data/video_0001.y4m,50\nc,data/video_0002.y4m,20\n";
  const auto r = run_cli({"train", (d / "three.csv").string(), "-o", (d / "three.ckpt").string()});
  EXPECT_EQ(r.exit_code, 5);
  EXPECT_FALSE(fs::exists(d / "three.ckpt"));
}

TEST(CliTrain, SeededRunsAreIdenticalAndScoreUsesCheckpoint) {
  const auto& d = small_dataset();
  auto train = [&](const std::string& tag, const std::string& jobs) {
    const auto ckpt = d / (tag + ".ckpt");
    const auto r = run_cli({"train", (d / "data" / "manifest.csv").string(), "-o", ckpt.string(), "--config",
                            (d / "train.json").string(), "--seed", "11", "--jobs", jobs});
    EXPECT_EQ(r.exit_code, 0) << r.err;
    return std::pair{r.out, slurp(ckpt)};
  };
  const auto a = train("a", "1"), b = train("b", "3");
  EXPECT_EQ(a.second, b.second);
  const auto ja = Json::parse(a.first), jb = Json::parse(b.first);
  EXPECT_EQ(ja["final_loss"], jb["final_loss"]);
  EXPECT_EQ(ja["epochs"].get<int>(), 3);
  EXPECT_EQ(ja["train_videos"].get<int>() + ja["val_videos"].get<int>(), 10);
  EXPECT_EQ(slurp(d / "a.ckpt.log.csv"), slurp(d / "b.ckpt.log.csv"));

  const auto video = (d / "data" / "video_0000.y4m").string();
  const auto s1 = run_cli({"score", video, "--checkpoint", (d / "a.ckpt").string(), "--seed", "2"});
  const auto s2 = run_cli({"score", video, "--checkpoint", (d / "a.ckpt").string(), "--seed", "2"});
  const auto j = parse(s1);
  EXPECT_EQ(s1.out, s2.out);
  ASSERT_TRUE(j.contains("prediction"));
  EXPECT_TRUE(std::isfinite(j["prediction"]["score"].get<double>()));
  EXPECT_EQ(j["prediction"]["clips"].get<int>(), 4);
}

TEST(CliEval, IdenticalColumnsAndReportKeys) {
  const auto dir = sk_test::scratch_dir("cli_eval");
  std::ofstream(dir / "pred.csv") << "video_id,score\na,10\nb,35\nc,20\nd,80\ne,55\n";
  std::ofstream(dir / "mos.csv") << "video_id,mos\ne,55\nd,80\nc,20\nb,35\na,10\n";
  const auto j = parse(run_cli({"eval", (dir / "pred.csv").string(), (dir / "mos.csv").string()}));
  for (const char* k : {"SROCC", "PLCC", "KRCC", "RMSE"}) ASSERT_TRUE(j.contains(k)) << k;
  EXPECT_DOUBLE_EQ(j["SROCC"].get<double>(), 1.0);
  EXPECT_DOUBLE_EQ(j["KRCC"].get<double>(), 1.0);
  EXPECT_NEAR(j["PLCC"].get<double>(), 1.0, 1e-5);
  EXPECT_EQ(j["n"].get<int>(), 5);
  std::ofstream(dir / "short.csv") << "a,10\nb,35\nc,20\nd,80\n";
  EXPECT_EQ(run_cli({"eval", (dir / "short.csv").string(), (dir / "mos.csv").string()}).exit_code, 2);
}

TEST(CliMos, PlantedSubjectIsReportedAndCleanPanelIsNot) {
  const auto dir = sk_test::scratch_dir("cli_mos");
  for (bool planted : {true, false}) {
    const auto in = dir / (planted ? "planted.csv" : "clean.csv");
    {
      std::ofstream f(in);
      sk_test::write_ratings_csv(f, sk_test::planted_outlier_rows(4, planted));
    }
    const auto out = dir / "mos_out.csv";
    const auto j = parse(run_cli({"mos", in.string(), "-o", out.string()}));
    const auto rejected = j["rejected_subjects"].get<std::vector<std::string>>();
    if (planted) EXPECT_EQ(rejected, std::vector<std::string>{"planted"});
    else EXPECT_TRUE(rejected.empty());
    const auto csv = slurp(out);
    EXPECT_EQ(csv.rfind("video_id,mos,std,n\n", 0), 0u);
    EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 21);
  }
  const auto stdout_only = run_cli({"mos", (dir / "clean.csv").string(), "--no-reject"});
  EXPECT_EQ(stdout_only.exit_code, 0);
  EXPECT_EQ(stdout_only.out.rfind("video_id,mos,std,n\n", 0), 0u);
}

TEST(CliSynth, ThreeLevelsTimesTenVideos) {
  const auto dir = sk_test::scratch_dir("cli_synth");
  std::ofstream(dir / "c.json") << R"({"count": 30, "ladder": [1, 4, 8], "length": 24, "out_size": 48,
                                      "margin": 24})";
  const auto j = parse(run_cli({"synth", "-o", (dir / "out").string(), "--config", (dir / "c.json").string(),
                                "--jobs", "4"}));
  EXPECT_EQ(j["videos"].get<int>(), 30);
  std::size_t y4m = 0;
  for (const auto& e : fs::directory_iterator(dir / "out")) y4m += e.path().extension() == ".y4m";
  EXPECT_EQ(y4m, 30u);
  const auto manifest = slurp(dir / "out" / "manifest.csv");
  EXPECT_EQ(std::count(manifest.begin(), manifest.end(), '\n'), 31);
  EXPECT_EQ(io::load_video(dir / "out" / "video_0029.y4m").size(), 24u);
}

TEST(CliConfig, UnknownKeyAndSeedFallback) {
  const auto dir = sk_test::scratch_dir("cli_config");
  std::ofstream(dir / "bad.json") << R"({"count": 10, "colour": "red"})";
  const auto bad = run_cli({"synth", "-o", (dir / "x").string(), "--config", (dir / "bad.json").string()});
  EXPECT_EQ(bad.exit_code, 2);
  EXPECT_NE(bad.err.find("colour"), std::string::npos);
  std::ofstream(dir / "bins.json") << R"({"count": 10, "length": 16})";
  EXPECT_EQ(run_cli({"synth", "-o", (dir / "x").string(), "--config", (dir / "bins.json").string()}).exit_code, 2);

  std::ofstream(dir / "c.json") << R"({"count": 10, "ladder": [2], "length": 24, "out_size": 32, "margin": 12})";
  auto manifest = [&](const std::string& tag, std::vector<std::string> extra, std::vector<std::string> env) {
    std::vector<std::string> args{"synth", "-o", (dir / tag).string(), "--config", (dir / "c.json").string()};
    args.insert(args.end(), extra.begin(), extra.end());
    const auto r = run_cli(args, env);
    EXPECT_EQ(r.exit_code, 0) << r.err;
    return slurp(dir / tag / "manifest.csv");
  };
  const auto flag = manifest("flag", {"--seed", "5"}, {});
  EXPECT_EQ(manifest("env", {}, {"STABILITYKIT_SEED=5"}), flag);
  EXPECT_EQ(manifest("flag_wins", {"--seed", "5"}, {"STABILITYKIT_SEED=6"}), flag);
  EXPECT_NE(manifest("other", {}, {"STABILITYKIT_SEED=6"}), flag);
  EXPECT_EQ(run_cli({"synth", "-o", (dir / "y").string(), "--config", (dir / "c.json").string()},
                    {"STABILITYKIT_SEED=abc"})
                .exit_code,
            2);
}

}  // namespace
