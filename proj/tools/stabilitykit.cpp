// stabilitykit command-line front end: score, trajectory, train, eval, mos, synth.
//
// Exit codes: 0 success, 2 input error, 3 missing model, 4 degenerate content,
// 5 insufficient data.

#include <CLI11.hpp>

#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "stabilitykit/stabilitykit.hpp"

namespace fs = std::filesystem;
using namespace stabilitykit;
using Json = nlohmann::ordered_json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInput = 2;
constexpr int kExitModel = 3;
constexpr int kExitDegenerate = 4;
constexpr int kExitInsufficient = 5;

class MissingModel : public Error {
 public:
  using Error::Error;
};

// Six significant digits, so reports do not depend on the last bits of a double.
double r6(double v) {
  if (!std::isfinite(v)) return v;
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return std::strtod(buf, nullptr);
}

std::string fmt6(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

// ---------------------------------------------------------------------------
// Config files: a flat JSON object; keys outside the command's schema are errors.

class Config {
 public:
  Config(const std::string& path, std::set<std::string> allowed) {
    if (path.empty()) return;
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open config " + path);
    try {
      j_ = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
      throw ParseError("config " + path + ": " + e.what());
    }
    if (!j_.is_object()) throw ConfigError("config " + path + " must be a JSON object");
    for (const auto& [k, v] : j_.items())
      if (!allowed.count(k)) throw ConfigError("unknown config key '" + k + "'");
  }

  bool has(const std::string& key) const { return j_.contains(key); }

  template <typename T>
  void get(const std::string& key, T& out) const {
    if (!j_.contains(key)) return;
    try {
      out = j_.at(key).get<T>();
    } catch (const nlohmann::json::exception&) {
      throw ConfigError("config key '" + key + "' has the wrong type");
    }
  }

 private:
  nlohmann::json j_ = nlohmann::json::object();
};

// Flag, then config file, then STABILITYKIT_SEED, then 0.
std::uint64_t resolve_seed(const CLI::Option* flag, std::uint64_t flag_value, const Config& cfg) {
  if (flag->count()) return flag_value;
  if (cfg.has("seed")) {
    std::uint64_t v = 0;
    cfg.get("seed", v);
    return v;
  }
  if (const char* env = std::getenv("STABILITYKIT_SEED")) {
    const std::string s(env);
    std::uint64_t v = 0;
    const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || ec != std::errc() || p != s.data() + s.size())
      throw ConfigError("STABILITYKIT_SEED is not an unsigned integer");
    return v;
  }
  return 0;
}

// ---------------------------------------------------------------------------
// Ordered parallel map: results land at their input index whatever order the
// workers finish in; the first failure by index is rethrown.

template <typename T>
std::vector<T> parallel_map(std::size_t n, unsigned jobs, const std::function<T(std::size_t)>& fn) {
  std::vector<std::optional<T>> out(n);
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i; (i = next++) < n;) {
      try {
        out[i] = fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const unsigned k = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(n)));
  if (k == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < k; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
  std::vector<T> res;
  res.reserve(n);
  for (auto& o : out) res.push_back(std::move(*o));
  return res;
}

MotionModel parse_model(const std::string& s) {
  if (s == "translation") return MotionModel::kTranslation;
  if (s == "similarity") return MotionModel::kSimilarity;
  if (s == "homography") return MotionModel::kHomography;
  throw ConfigError("motion model must be translation, similarity or homography");
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParseError("cannot write " + path.string());
  out << text;
}

Json report_json(const eval::MetricReport& r) {
  return {{"SROCC", r6(r.srocc)}, {"PLCC", r6(r.plcc)}, {"KRCC", r6(r.krcc)}, {"RMSE", r6(r.rmse)}};
}

void print_json(const Json& j) { std::cout << j.dump(2) << '\n'; }

features::FeatureConfig feature_config(const Config& c) {
  features::FeatureConfig f;
  c.get("n", f.n);
  c.get("tau", f.tau);
  c.get("tau_b", f.tau_b);
  c.get("grid", f.grid);
  c.get("resize", f.resize);
  f.validate();
  return f;
}

// ---------------------------------------------------------------------------
// score

struct ScoreArgs {
  std::string video, checkpoint, config, model = "similarity";
  std::size_t clips = 4;
  std::uint64_t seed = 0;
  CLI::Option* seed_opt = nullptr;
  CLI::Option* model_opt = nullptr;
  CLI::Option* clips_opt = nullptr;
};

int cmd_score(const ScoreArgs& a) {
  const Config cfg(a.config, {"model", "clips", "seed"});
  std::string model_name = a.model;
  std::size_t clips = a.clips;
  if (!a.model_opt->count()) cfg.get("model", model_name);
  if (!a.clips_opt->count()) cfg.get("clips", clips);
  const auto seed = resolve_seed(a.seed_opt, a.seed, cfg);
  const auto kind = parse_model(model_name);

  std::optional<model::ModelParams> params;
  if (!a.checkpoint.empty()) {
    if (!fs::exists(a.checkpoint)) throw MissingModel("checkpoint not found: " + a.checkpoint);
    params = model::load_checkpoint(a.checkpoint);
  }
  const auto seq = io::load_video(a.video);
  const auto itf = metrics::itf(seq);
  const auto traj = motion::estimate_trajectory(seq, kind, {500, 2.0, seed});
  const auto st = metrics::stability_score(traj);

  Json j;
  j["video"] = fs::path(a.video).filename().string();
  j["frames"] = seq.size();
  j["width"] = seq.width();
  j["height"] = seq.height();
  j["motion_model"] = model_name;
  j["itf_db"] = r6(itf.score_db);
  j["stability"] = {{"score", r6(st.score)},
                    {"x", r6(st.components.x)},
                    {"y", r6(st.components.y)},
                    {"theta", r6(st.components.theta)}};
  if (params) {
    j["prediction"] = {{"score", r6(model::predict_video(*params, seq, clips, seed))},
                       {"clips", clips},
                       {"seed", seed}};
  }
  print_json(j);
  return kExitOk;
}

// ---------------------------------------------------------------------------
// trajectory

struct TrajectoryArgs {
  std::string video, out, plot, config, model = "similarity";
  std::uint64_t seed = 0;
  CLI::Option* seed_opt = nullptr;
  CLI::Option* model_opt = nullptr;
};

int cmd_trajectory(const TrajectoryArgs& a) {
  const Config cfg(a.config, {"model", "seed"});
  std::string model_name = a.model;
  if (!a.model_opt->count()) cfg.get("model", model_name);
  const auto seed = resolve_seed(a.seed_opt, a.seed, cfg);
  const auto seq = io::load_video(a.video);
  const auto traj = motion::estimate_trajectory(seq, parse_model(model_name), {500, 2.0, seed});
  std::ostringstream csv;
  motion::write_trajectory_csv(csv, traj);
  if (a.out.empty() || a.out == "-") std::cout << csv.str();
  else write_text(a.out, csv.str());
  if (!a.plot.empty()) {
    // gnuplot: plot 'file' using 1:2 with lines, ...
    std::ostringstream dat;
    dat << "# frame x y theta\n";
    for (std::size_t t = 0; t < traj.length(); ++t)
      dat << t << ' ' << fmt6(traj.x[t]) << ' ' << fmt6(traj.y[t]) << ' ' << fmt6(traj.theta[t]) << '\n';
    write_text(a.plot, dat.str());
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------
// train

struct ManifestEntry {
  std::string id;
  fs::path path;
  double score = 0;
};

// video_id,path,gt_score; relative paths resolve against the manifest's folder.
std::vector<ManifestEntry> read_manifest(const fs::path& path) {
  auto rows = csv::read_file(path);
  csv::drop_header(rows, 2);
  std::vector<ManifestEntry> out;
  for (const auto& r : rows) {
    if (r.fields.size() != 3)
      throw ParseError(path.string() + " line " + std::to_string(r.line_no) + ": expected video_id,path,gt_score");
    fs::path p(r.fields[1]);
    if (p.is_relative()) p = path.parent_path() / p;
    out.push_back({r.fields[0], p, csv::require_double(r.fields[2], r.line_no)});
  }
  return out;
}

struct TrainArgs {
  std::string manifest, config, out, log;
  std::uint64_t seed = 0;
  unsigned jobs = 1;
  std::size_t epochs = 0, batch_size = 0;
  double lambda = 0, lr = 0, val_fraction = 0;
  CLI::Option *seed_opt = nullptr, *epochs_opt = nullptr, *batch_opt = nullptr, *lambda_opt = nullptr,
              *lr_opt = nullptr, *val_opt = nullptr;
};

int cmd_train(const TrainArgs& a) {
  const Config cfg(a.config, {"lambda", "epochs", "batch_size", "lr_head", "seed", "schedule", "n", "tau",
                              "tau_b", "grid", "resize", "val_fraction", "clips"});
  model::TrainConfig tc;
  cfg.get("lambda", tc.lambda);
  cfg.get("epochs", tc.epochs);
  cfg.get("batch_size", tc.batch_size);
  cfg.get("lr_head", tc.lr_head);
  cfg.get("schedule", tc.schedule);
  double val_fraction = 0.2;
  std::size_t clips = 4;
  cfg.get("val_fraction", val_fraction);
  cfg.get("clips", clips);
  if (a.lambda_opt->count()) tc.lambda = a.lambda;
  if (a.epochs_opt->count()) tc.epochs = a.epochs;
  if (a.batch_opt->count()) tc.batch_size = a.batch_size;
  if (a.lr_opt->count()) tc.lr_head = a.lr;
  if (a.val_opt->count()) val_fraction = a.val_fraction;
  tc.seed = resolve_seed(a.seed_opt, a.seed, cfg);
  tc.validate();
  if (!(val_fraction >= 0 && val_fraction < 1)) throw ConfigError("val_fraction must be in [0, 1)");
  if (clips < 1) throw ConfigError("clips must be >= 1");
  const auto fc = feature_config(cfg);

  const auto entries = read_manifest(a.manifest);
  if (entries.size() < 2 * tc.batch_size)
    throw InsufficientData("manifest has " + std::to_string(entries.size()) + " videos; training needs at least " +
                           std::to_string(2 * tc.batch_size));
  const auto samples = parallel_map<model::TrainSample>(entries.size(), a.jobs, [&](std::size_t i) {
    return model::make_sample(io::load_video(entries[i].path), entries[i].score, fc);
  });

  std::vector<std::size_t> order(entries.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  Rng split_rng(derive_seed(tc.seed, 0x5711));
  split_rng.shuffle(order);
  const auto n_val = static_cast<std::size_t>(std::lround(val_fraction * static_cast<double>(entries.size())));
  std::vector<model::TrainSample> train_set, val_set;
  for (std::size_t k = 0; k < order.size(); ++k) (k < n_val ? val_set : train_set).push_back(samples[order[k]]);

  const auto res = model::train(train_set, tc, fc, val_set.size() >= 3 ? &val_set : nullptr);
  model::save_checkpoint(a.out, res.params);
  std::ostringstream log;
  model::write_train_log(log, res.log);
  write_text(a.log.empty() ? a.out + ".log.csv" : a.log, log.str());

  Json j;
  j["checkpoint"] = fs::path(a.out).filename().string();
  j["train_videos"] = train_set.size();
  j["val_videos"] = val_set.size();
  j["epochs"] = res.log.size();
  j["final_loss"] = r6(res.log.back().loss);
  j["best_epoch"] = res.best_epoch ? Json(*res.best_epoch) : Json(nullptr);
  if (val_set.size() >= 5) {
    std::vector<double> pred, mos;
    for (std::size_t k = 0; k < val_set.size(); ++k) {
      pred.push_back(model::predict_video(res.params, val_set[k], clips, derive_seed(tc.seed, k)));
      mos.push_back(val_set[k].mos);
    }
    j["validation"] = report_json(eval::evaluate(pred, mos));
  } else {
    j["validation"] = nullptr;
  }
  print_json(j);
  return kExitOk;
}

// ---------------------------------------------------------------------------
// eval

// Two-column id,value table (extra columns ignored); header optional.
std::vector<std::pair<std::string, double>> read_scores(const fs::path& path) {
  auto rows = csv::read_file(path);
  csv::drop_header(rows, 1);
  std::vector<std::pair<std::string, double>> out;
  for (const auto& r : rows) {
    if (r.fields.size() < 2)
      throw ParseError(path.string() + " line " + std::to_string(r.line_no) + ": expected id,value");
    out.emplace_back(r.fields[0], csv::require_double(r.fields[1], r.line_no));
  }
  if (out.empty()) throw EmptyInput(path.string() + " has no rows");
  return out;
}

int cmd_eval(const std::string& pred_path, const std::string& mos_path) {
  const auto pred = read_scores(pred_path), mos = read_scores(mos_path);
  if (pred.size() != mos.size())
    throw DimensionMismatch("prediction and MOS files have " + std::to_string(pred.size()) + " and " +
                            std::to_string(mos.size()) + " rows");
  std::map<std::string, double> by_id;
  for (const auto& [id, v] : mos)
    if (!by_id.emplace(id, v).second) throw ParseError("duplicate video id '" + id + "' in " + mos_path);
  std::vector<double> p, m;
  for (const auto& [id, v] : pred) {
    const auto it = by_id.find(id);
    if (it == by_id.end()) throw DimensionMismatch("video '" + id + "' has no MOS");
    p.push_back(v);
    m.push_back(it->second);
  }
  const auto r = eval::evaluate(p, m);
  Json j = report_json(r);
  j["n"] = p.size();
  j["logistic_beta"] = {r6(r.logistic_beta[0]), r6(r.logistic_beta[1]), r6(r.logistic_beta[2]),
                        r6(r.logistic_beta[3])};
  print_json(j);
  return kExitOk;
}

// ---------------------------------------------------------------------------
// mos

struct MosArgs {
  std::string ratings, out, config, denominator = "rated";
  bool no_reject = false;
  double sigma = 2.0, fraction = 0.05;
  std::size_t split_n = 0, repeats = 100;
  std::uint64_t seed = 0;
  CLI::Option *seed_opt = nullptr, *sigma_opt = nullptr, *fraction_opt = nullptr, *denom_opt = nullptr;
};

int cmd_mos(const MosArgs& a) {
  const Config cfg(a.config, {"sigma_multiple", "max_outlier_fraction", "denominator", "seed"});
  mos::RejectionOptions opt;
  std::string denom = a.denominator;
  cfg.get("sigma_multiple", opt.sigma_multiple);
  cfg.get("max_outlier_fraction", opt.max_outlier_fraction);
  cfg.get("denominator", denom);
  if (a.sigma_opt->count()) opt.sigma_multiple = a.sigma;
  if (a.fraction_opt->count()) opt.max_outlier_fraction = a.fraction;
  if (a.denom_opt->count()) denom = a.denominator;
  if (denom == "rated") opt.denominator = mos::OutlierDenominator::kRatedVideos;
  else if (denom == "all") opt.denominator = mos::OutlierDenominator::kAllVideos;
  else throw ConfigError("denominator must be 'rated' or 'all'");
  const auto seed = resolve_seed(a.seed_opt, a.seed, cfg);

  std::ifstream in(a.ratings);
  if (!in) throw ParseError("cannot open " + a.ratings);
  const auto table = mos::read_ratings(in);
  const auto res = a.no_reject ? mos::compute_mos(table) : mos::reject_outlier_subjects(table, opt);
  std::ostringstream out;
  mos::write_mos_csv(out, res);
  if (a.out.empty() || a.out == "-") std::cout << out.str();
  else write_text(a.out, out.str());

  if (!a.out.empty() && a.out != "-") {
    Json j;
    j["subjects"] = table.subjects().size();
    j["videos"] = table.videos().size();
    j["rejection"] = a.no_reject ? "off" : "2sigma";
    j["rejected_subjects"] = res.rejected_subjects;
    if (a.split_n > 0)
      j["split_half"] = {{"n", a.split_n}, {"repeats", a.repeats}, {"seed", seed},
                         {"srocc", r6(mos::split_half(table, a.split_n, a.repeats, seed))}};
    print_json(j);
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------
// synth

struct SynthArgs {
  std::string config, out;
  std::uint64_t seed = 0;
  unsigned jobs = 1;
  CLI::Option* seed_opt = nullptr;
};

const char* axis_name(synth::Axis a) {
  return a == synth::Axis::kX ? "x" : a == synth::Axis::kY ? "y" : "theta";
}

int cmd_synth(const SynthArgs& a) {
  const Config cfg(a.config, {"count", "ladder", "seed", "length", "out_size", "margin", "alpha", "fps",
                              "min_jitter_bin", "max_jitter_bin", "max_pan_px"});
  std::vector<double> ladder{0.5, 1, 1.5, 2, 3, 4, 5, 6, 7, 8};
  std::size_t count = 200;
  synth::DatasetOptions o;
  cfg.get("ladder", ladder);
  cfg.get("count", count);
  cfg.get("length", o.length);
  cfg.get("out_size", o.out_size);
  cfg.get("margin", o.margin);
  cfg.get("alpha", o.alpha);
  cfg.get("fps", o.fps);
  cfg.get("min_jitter_bin", o.min_jitter_bin);
  cfg.get("max_jitter_bin", o.max_jitter_bin);
  cfg.get("max_pan_px", o.max_pan_px);
  const auto seed = resolve_seed(a.seed_opt, a.seed, cfg);
  if (count < 10) throw ConfigError("a dataset needs at least 10 videos");
  if (o.min_jitter_bin < 1 || o.min_jitter_bin > o.max_jitter_bin ||
      2.0 * o.max_jitter_bin > static_cast<double>(o.length))
    throw ConfigError("jitter bins must satisfy 1 <= min_jitter_bin <= max_jitter_bin <= length/2");
  if (ladder.empty()) throw ConfigError("empty amplitude ladder");
  for (double l : ladder)
    if (!(l >= 0)) throw ConfigError("ladder levels must be >= 0");

  fs::create_directories(a.out);
  struct Written {
    std::string id;
    double score;
  };
  const auto written = parallel_map<Written>(count, a.jobs, [&](std::size_t i) {
    char id[32];
    std::snprintf(id, sizeof id, "video_%04zu", i);
    const auto v = synth::gen_video(i, ladder, seed, o);
    io::save_y4m(fs::path(a.out) / (std::string(id) + ".y4m"), v.seq);
    Json spec;
    spec["video_id"] = id;
    spec["level_px"] = ladder[i % ladder.size()];
    spec["length"] = v.spec.length;
    spec["out_size"] = o.out_size;
    spec["fps"] = o.fps;
    spec["noise_sigma"] = v.spec.noise_sigma;
    Json comps = Json::array();
    for (const auto& c : v.spec.components)
      comps.push_back({{"axis", axis_name(c.axis)},
                       {"amplitude", r6(c.amplitude)},
                       {"frequency", c.frequency},
                       {"phase", r6(c.phase)}});
    spec["components"] = comps;
    spec["alpha"] = o.alpha;
    spec["gt_score"] = r6(v.gt_score);
    write_text(fs::path(a.out) / (std::string(id) + ".json"), spec.dump(2) + "\n");
    return Written{id, v.gt_score};
  });
  std::ostringstream manifest;
  manifest << "video_id,path,gt_score\n";
  for (const auto& w : written) manifest << w.id << ',' << w.id << ".y4m," << fmt6(w.score) << '\n';
  write_text(fs::path(a.out) / "manifest.csv", manifest.str());
  print_json({{"videos", written.size()}, {"seed", seed}, {"manifest", "manifest.csv"}});
  return kExitOk;
}

int run(const std::function<int()>& body) {
  try {
    return body();
  } catch (const MissingModel& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitModel;
  } catch (const DegenerateScene& e) {
    std::cerr << "error: degenerate content: " << e.what() << '\n';
    return kExitDegenerate;
  } catch (const DegenerateInput& e) {
    std::cerr << "error: degenerate content: " << e.what() << '\n';
    return kExitDegenerate;
  } catch (const InsufficientData& e) {
    std::cerr << "error: insufficient data: " << e.what() << '\n';
    return kExitInsufficient;
  } catch (const InsufficientFrames& e) {
    std::cerr << "error: insufficient data: " << e.what() << '\n';
    return kExitInsufficient;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInput;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInput;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"No-reference video stability toolkit"};
  app.require_subcommand(1);
  std::function<int()> body;

  ScoreArgs sa;
  auto* score = app.add_subcommand("score", "ITF, Stability Score and (with --checkpoint) learned score as JSON");
  score->add_option("video", sa.video, "Y4M file or frame directory")->required();
  score->add_option("--checkpoint", sa.checkpoint, "model checkpoint");
  sa.model_opt = score->add_option("--model", sa.model, "translation | similarity | homography");
  sa.clips_opt = score->add_option("--clips", sa.clips, "clips averaged by the learned score");
  sa.seed_opt = score->add_option("--seed", sa.seed);
  score->add_option("--config", sa.config, "JSON config");
  score->callback([&] { body = [&] { return cmd_score(sa); }; });

  TrajectoryArgs ta;
  auto* traj = app.add_subcommand("trajectory", "camera path as CSV frame,x,y,theta");
  traj->add_option("video", ta.video)->required();
  traj->add_option("-o,--out", ta.out, "CSV path (default stdout)");
  traj->add_option("--plot", ta.plot, "also write gnuplot data");
  ta.model_opt = traj->add_option("--model", ta.model);
  ta.seed_opt = traj->add_option("--seed", ta.seed);
  traj->add_option("--config", ta.config);
  traj->callback([&] { body = [&] { return cmd_trajectory(ta); }; });

  TrainArgs tr;
  auto* train = app.add_subcommand("train", "extract features, train the regression head, write a checkpoint");
  train->add_option("manifest", tr.manifest, "CSV video_id,path,gt_score")->required();
  train->add_option("-o,--out", tr.out, "checkpoint path")->required();
  train->add_option("--log", tr.log, "training log CSV (default <out>.log.csv)");
  train->add_option("--config", tr.config);
  tr.seed_opt = train->add_option("--seed", tr.seed);
  tr.epochs_opt = train->add_option("--epochs", tr.epochs);
  tr.batch_opt = train->add_option("--batch-size", tr.batch_size);
  tr.lambda_opt = train->add_option("--lambda", tr.lambda);
  tr.lr_opt = train->add_option("--lr", tr.lr);
  tr.val_opt = train->add_option("--val-fraction", tr.val_fraction);
  train->add_option("--jobs", tr.jobs, "feature extraction workers")->check(CLI::PositiveNumber);
  train->callback([&] { body = [&] { return cmd_train(tr); }; });

  std::string pred_path, mos_path;
  auto* ev = app.add_subcommand("eval", "SROCC, PLCC, KRCC and RMSE of predictions against MOS");
  ev->add_option("predictions", pred_path, "CSV video_id,score")->required();
  ev->add_option("mos", mos_path, "CSV video_id,mos[,...]")->required();
  ev->callback([&] { body = [&] { return cmd_eval(pred_path, mos_path); }; });

  MosArgs ma;
  auto* mo = app.add_subcommand("mos", "MOS with 2-sigma outlier-subject rejection");
  mo->add_option("ratings", ma.ratings, "CSV subject_id,video_id,score[,session]")->required();
  mo->add_option("-o,--out", ma.out, "MOS CSV path (default stdout, no report)");
  mo->add_flag("--no-reject", ma.no_reject, "skip subject rejection");
  ma.sigma_opt = mo->add_option("--sigma", ma.sigma);
  ma.fraction_opt = mo->add_option("--max-fraction", ma.fraction);
  ma.denom_opt = mo->add_option("--denominator", ma.denominator, "rated | all");
  mo->add_option("--split-half", ma.split_n, "group size for split-half reliability");
  mo->add_option("--repeats", ma.repeats);
  ma.seed_opt = mo->add_option("--seed", ma.seed);
  mo->add_option("--config", ma.config);
  mo->callback([&] { body = [&] { return cmd_mos(ma); }; });

  SynthArgs sy;
  auto* sn = app.add_subcommand("synth", "write a labelled synthetic dataset (Y4M + manifest)");
  sn->add_option("-o,--out", sy.out, "output directory")->required();
  sn->add_option("--config", sy.config);
  sy.seed_opt = sn->add_option("--seed", sy.seed);
  sn->add_option("--jobs", sy.jobs)->check(CLI::PositiveNumber);
  sn->callback([&] { body = [&] { return cmd_synth(sy); }; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitInput;
  }
  return run(body);
}
