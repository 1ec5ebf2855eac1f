// mousedyn command line: fetch the corpus, inspect it, and run the
// segmentation -> features -> train -> evaluate pipeline with reproducible
// seeding. See README.md for the file contracts between subcommands.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "mousedyn/archive.hpp"
#include "mousedyn/errors.hpp"
#include "mousedyn/evaluation.hpp"
#include "mousedyn/io.hpp"
#include "mousedyn/parallel.hpp"
#include "mousedyn/rng.hpp"
#include "mousedyn/session.hpp"
#include "mousedyn/version.hpp"

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

using namespace mousedyn;

namespace {

struct GlobalConfig {
  std::filesystem::path data_root;
  std::filesystem::path labels;
  std::uint64_t seed = 1;
  int trees = 100;
  std::string resample_method = "none";
  std::string prob_mode = "vote";
  double hz = 20.0;
  std::filesystem::path out = "out";
  int jobs = 0;
  bool force = false;
  int max_x = 4096;
  int max_y = 4096;
  bool lenient_tokens = false;
  bool dedup_coords = false;

  IngestConfig ingest() const {
    IngestConfig c;
    c.max_x = max_x;
    c.max_y = max_y;
    c.strict_tokens = !lenient_tokens;
    c.dedup_exact = !dedup_coords;
    return c;
  }

  ProbabilityMode probability_mode() const {
    return prob_mode == "mean-leaf" ? ProbabilityMode::MeanLeafProbability
                                    : ProbabilityMode::VoteFraction;
  }

  ResampleConfig resample() const {
    ResampleConfig c;
    c.frequency_hz = hz;
    if (resample_method == "linear") c.method = ResampleMethod::Linear;
    else if (resample_method == "spline") c.method = ResampleMethod::CubicSpline;
    else c.method = ResampleMethod::None;
    return c;
  }

  std::filesystem::path labels_or_default() const {
    if (!labels.empty()) return labels;
    for (const char* cand : {"public_labels.csv", "labels.csv"}) {
      if (std::filesystem::exists(data_root / cand)) return data_root / cand;
    }
    return labels;
  }
};

void ensure_writable(const std::filesystem::path& p, bool force) {
  if (std::filesystem::exists(p) && !force) {
    throw Error("output exists, pass --force to overwrite: " + p.string());
  }
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
}

struct PipelineData {
  std::map<int, std::vector<ActionFeatures>> train_features;
  std::map<int, std::vector<MouseAction>> train_actions;
  std::vector<TestSessionFeatures> test_features;
  std::vector<TestSessionActions> test_actions;
  int n_training = 0, n_positive = 0, n_negative = 0;
  ActionTypeCounts train_hist, test_hist;
  std::map<int, ActionTypeCounts> per_user_train_hist;
};

PipelineData load_pipeline_data(const GlobalConfig& cfg, bool need_test,
                                const ResampleConfig& rs) {
  if (cfg.data_root.empty()) throw Error("--data-root is required");
  PipelineData d;
  for_each_session(cfg.data_root, cfg.labels_or_default(), cfg.ingest(), cfg.jobs,
                   [&](Session&& s) {
    if (s.role != SessionRole::Training && !need_test) return;
    const auto actions = segment(s);
    const bool training = s.role == SessionRole::Training;
    TestSessionFeatures tf;
    TestSessionActions ta;
    if (training) {
      ++d.n_training;
    } else {
      (s.role == SessionRole::TestPositive ? d.n_positive : d.n_negative)++;
      tf.claimed_user = ta.claimed_user = s.user_id;
      tf.session_id = ta.session_id = s.session_id;
      tf.legal = ta.legal = s.role == SessionRole::TestPositive;
    }
    for (const auto& raw : actions) {
      const MouseAction a = resample(raw, rs).action;
      ActionFeatures f = extract_features(a);
      ActionTypeCounts& hist = training ? d.train_hist : d.test_hist;
      switch (a.kind) {
        case ActionKind::MM: ++hist.mm; break;
        case ActionKind::PC: ++hist.pc; break;
        case ActionKind::DD: ++hist.dd; break;
      }
      if (training) {
        auto& uh = d.per_user_train_hist[s.user_id];
        switch (a.kind) {
          case ActionKind::MM: ++uh.mm; break;
          case ActionKind::PC: ++uh.pc; break;
          case ActionKind::DD: ++uh.dd; break;
        }
        d.train_features[s.user_id].push_back(std::move(f));
        d.train_actions[s.user_id].push_back(raw);
      } else {
        f.genuine = tf.legal;
        tf.actions.push_back(std::move(f));
        ta.actions.push_back(raw);
      }
    }
    if (!training) {
      d.test_features.push_back(std::move(tf));
      d.test_actions.push_back(std::move(ta));
    }
  });
  if (d.n_training == 0 && d.n_positive == 0 && d.n_negative == 0) {
    throw Error("no sessions found under " + cfg.data_root.string());
  }
  return d;
}

nlohmann::json config_echo(const GlobalConfig& cfg, const std::string& command) {
  nlohmann::json m;
  m["command"] = command;
  m["seed"] = cfg.seed;
  m["trees"] = cfg.trees;
  m["resample"] = cfg.resample_method;
  m["prob_mode"] = cfg.prob_mode;
  m["hz"] = cfg.hz;
  m["max_x"] = cfg.max_x;
  m["max_y"] = cfg.max_y;
  m["strict_tokens"] = !cfg.lenient_tokens;
  m["dedup_exact"] = !cfg.dedup_coords;
  return m;
}

// The config hash covers everything that can change results (not --jobs).
std::string config_hash(const GlobalConfig& cfg, const std::string& command,
                        const nlohmann::json& extra) {
  nlohmann::json m = config_echo(cfg, command);
  for (auto it = extra.begin(); it != extra.end(); ++it) m[it.key()] = it.value();
  return sha256_hex(m.dump());
}

// extra_config participates in the config hash; results are informational.
void write_manifest(const GlobalConfig& cfg, const std::string& command,
                    const nlohmann::json& extra_config,
                    const nlohmann::json& results = {}) {
  nlohmann::json m = config_echo(cfg, command);
  m["config_sha256"] = config_hash(cfg, command, extra_config);
  m["jobs"] = cfg.jobs;
  m["git"] = kGitDescribe;
  if (!cfg.data_root.empty()) {
    m["data_root"] = cfg.data_root.string();
    m["corpus_sha256"] = hash_tree(cfg.data_root);
  }
  const auto now = std::chrono::system_clock::now().time_since_epoch();
  m["wall_clock_unix_s"] =
      std::chrono::duration_cast<std::chrono::seconds>(now).count();
  for (auto it = extra_config.begin(); it != extra_config.end(); ++it) m[it.key()] = it.value();
  for (auto it = results.begin(); it != results.end(); ++it) m[it.key()] = it.value();

  const auto path = cfg.out / "manifest.json";
  ensure_writable(path, true);  // manifests are always refreshed
  std::ofstream outf(path, std::ios::binary);
  outf << m.dump(2) << '\n';
}

// ---- subcommand bodies ----

int cmd_fetch(const GlobalConfig& cfg, const std::string& url, const std::string& sha256,
              bool extract) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) throw Error("bad url: " + url);
  const auto host_start = scheme_end + 3;
  const auto path_start = url.find('/', host_start);
  const std::string origin = url.substr(0, path_start);
  const std::string path = path_start == std::string::npos ? "/" : url.substr(path_start);

  std::filesystem::path archive = cfg.out;
  if (archive.empty()) archive = "corpus.zip";
  ensure_writable(archive, cfg.force);

  std::string current_origin = origin;
  std::string current_path = path;
  std::string body;
  for (int redirects = 0; redirects < 8; ++redirects) {
    httplib::Client client(current_origin);
    client.set_follow_location(false);
    client.set_connection_timeout(30);
    client.set_read_timeout(300);
    auto res = client.Get(current_path);
    if (!res) throw Error("download failed: " + httplib::to_string(res.error()));
    if (res->status >= 300 && res->status < 400 && res->has_header("Location")) {
      std::string loc = res->get_header_value("Location");
      if (loc.rfind("http", 0) == 0) {
        const auto se = loc.find("://");
        const auto ps = loc.find('/', se + 3);
        current_origin = loc.substr(0, ps);
        current_path = ps == std::string::npos ? "/" : loc.substr(ps);
      } else {
        current_path = loc;
      }
      continue;
    }
    if (res->status != 200) throw Error("download failed: HTTP " + std::to_string(res->status));
    body = std::move(res->body);
    break;
  }
  if (body.empty()) throw Error("download failed: empty response for " + url);

  {
    std::ofstream outf(archive, std::ios::binary);
    if (!outf) throw Error("cannot write " + archive.string());
    outf.write(body.data(), static_cast<std::streamsize>(body.size()));
  }
  std::printf("downloaded %zu bytes to %s\n", body.size(), archive.string().c_str());

  const std::string got = sha256_file(archive);
  if (!sha256.empty()) {
    if (got != sha256) {
      throw Error("sha256 mismatch: expected " + sha256 + ", got " + got);
    }
    std::printf("sha256 verified: %s\n", got.c_str());
  } else {
    std::printf("sha256: %s (record this and pass --sha256 next time)\n", got.c_str());
  }

  if (extract) {
    const auto dest = archive.parent_path().empty() ? std::filesystem::path(".")
                                                    : archive.parent_path();
    const std::size_t n = extract_zip(archive, dest);
    std::printf("extracted %zu files into %s\n", n, dest.string().c_str());
  }
  return 0;
}

int cmd_stats(const GlobalConfig& cfg) {
  const PipelineData d = load_pipeline_data(cfg, true, {});
  std::filesystem::create_directories(cfg.out);

  auto pct = [](const ActionTypeCounts& h, std::int64_t k) {
    return 100.0 * h.share(k);
  };
  std::printf("sessions: %d training, %d test positive, %d test negative\n", d.n_training,
              d.n_positive, d.n_negative);
  std::printf("part,MM,PC,DD,total\n");
  std::printf("training,%lld (%.2f%%),%lld (%.2f%%),%lld (%.2f%%),%lld\n",
              static_cast<long long>(d.train_hist.mm), pct(d.train_hist, d.train_hist.mm),
              static_cast<long long>(d.train_hist.pc), pct(d.train_hist, d.train_hist.pc),
              static_cast<long long>(d.train_hist.dd), pct(d.train_hist, d.train_hist.dd),
              static_cast<long long>(d.train_hist.total()));
  std::printf("test,%lld (%.2f%%),%lld (%.2f%%),%lld (%.2f%%),%lld\n",
              static_cast<long long>(d.test_hist.mm), pct(d.test_hist, d.test_hist.mm),
              static_cast<long long>(d.test_hist.pc), pct(d.test_hist, d.test_hist.pc),
              static_cast<long long>(d.test_hist.dd), pct(d.test_hist, d.test_hist.dd),
              static_cast<long long>(d.test_hist.total()));

  const auto path = cfg.out / "stats.csv";
  ensure_writable(path, cfg.force);
  std::ofstream outf(path, std::ios::binary);
  outf << "scope,MM,PC,DD,total\n";
  outf << "training," << d.train_hist.mm << ',' << d.train_hist.pc << ',' << d.train_hist.dd
       << ',' << d.train_hist.total() << '\n';
  outf << "test," << d.test_hist.mm << ',' << d.test_hist.pc << ',' << d.test_hist.dd << ','
       << d.test_hist.total() << '\n';
  for (const auto& [user, h] : d.per_user_train_hist) {
    outf << "user" << user << ',' << h.mm << ',' << h.pc << ',' << h.dd << ',' << h.total()
         << '\n';
  }
  write_manifest(cfg, "stats", {});
  std::printf("wrote %s\n", path.string().c_str());
  return 0;
}

int cmd_segment(const GlobalConfig& cfg) {
  const PipelineData d = load_pipeline_data(cfg, true, {});
  std::vector<MouseAction> all;
  for (const auto& [user, actions] : d.train_actions) {
    all.insert(all.end(), actions.begin(), actions.end());
  }
  for (const auto& s : d.test_actions) {
    all.insert(all.end(), s.actions.begin(), s.actions.end());
  }
  const auto path = cfg.out / "actions.csv";
  ensure_writable(path, cfg.force);
  write_actions_csv(path, all);
  write_manifest(cfg, "segment", {}, {{"n_actions", all.size()}});
  std::printf("wrote %zu actions to %s\n", all.size(), path.string().c_str());
  return 0;
}

int cmd_features(const GlobalConfig& cfg) {
  const PipelineData d = load_pipeline_data(cfg, true, cfg.resample());

  std::vector<ActionFeatures> train_rows;
  for (const auto& [user, rows] : d.train_features) {
    train_rows.insert(train_rows.end(), rows.begin(), rows.end());
  }
  std::vector<ActionFeatures> test_rows;
  for (const auto& s : d.test_features) {
    test_rows.insert(test_rows.end(), s.actions.begin(), s.actions.end());
  }

  const auto train_path = cfg.out / "features_training.csv";
  const auto test_path = cfg.out / "features_test.csv";
  ensure_writable(train_path, cfg.force);
  write_features_csv(train_path, train_rows);
  std::printf("wrote %zu training rows to %s\n", train_rows.size(), train_path.string().c_str());
  if (!test_rows.empty()) {
    ensure_writable(test_path, cfg.force);
    write_features_csv(test_path, test_rows);
    std::printf("wrote %zu test rows to %s\n", test_rows.size(), test_path.string().c_str());
  }
  write_manifest(cfg, "features", {},
                 {{"n_train_rows", train_rows.size()}, {"n_test_rows", test_rows.size()}});
  return 0;
}

std::map<int, std::vector<ActionFeatures>> training_pool(const GlobalConfig& cfg,
                                                         const std::filesystem::path& csv) {
  if (!csv.empty()) return group_by_user(read_features_csv(csv));
  return load_pipeline_data(cfg, false, cfg.resample()).train_features;
}

int cmd_train(const GlobalConfig& cfg, int user, const std::filesystem::path& features_csv) {
  const auto pool = training_pool(cfg, features_csv);
  const UserDataset ds = build_user_dataset(pool, user, cfg.seed);
  ForestOptions opt;
  opt.num_trees = cfg.trees;
  opt.probability_mode = cfg.probability_mode();
  opt.jobs = cfg.jobs;
  const std::uint64_t forest_seed =
      derive_seed(cfg.seed, {kStreamForest, static_cast<std::uint64_t>(user)});
  const ForestModel model = train_forest(ds, opt, forest_seed);

  std::filesystem::path path = cfg.out;
  if (path.empty() || std::filesystem::is_directory(path)) {
    path = path / ("model_user" + std::to_string(user) + ".json");
  }
  ensure_writable(path, cfg.force);
  save_model(model, path);
  std::printf("trained %d trees on %zu rows for user %d -> %s\n", cfg.trees, ds.rows.size(),
              user, path.string().c_str());
  return 0;
}

int cmd_rank_features(const GlobalConfig& cfg, int user,
                      const std::filesystem::path& features_csv) {
  const auto pool = training_pool(cfg, features_csv);
  // Default: one global table with the user identity as the class. With
  // --user: that user's balanced genuine/impostor dataset instead.
  const auto ranking = user >= 0 ? gain_ratio_ranking(build_user_dataset(pool, user, cfg.seed))
                                 : gain_ratio_ranking_by_user(pool);
  const auto path = cfg.out / "feature_ranking.csv";
  ensure_writable(path, cfg.force);
  write_ranking_csv(path, ranking);
  for (std::size_t i = 0; i < ranking.size(); ++i) {
    std::printf("%2zu  %-26s %.5f\n", i + 1, ranking[i].first.c_str(), ranking[i].second);
  }
  write_manifest(cfg, "rank-features", {});
  std::printf("wrote %s\n", path.string().c_str());
  return 0;
}

struct RunArgs {
  std::string scenario = "A";
  std::string protocol = "action";
  std::string kind;
  bool smoothing = false;
  std::filesystem::path features_train;
  std::filesystem::path features_test;
};

int cmd_run(const GlobalConfig& cfg, const RunArgs& args) {
  Protocol protocol = Protocol::Action;
  int set_size = 1;
  if (args.protocol == "action") {
    protocol = Protocol::Action;
  } else if (args.protocol == "session") {
    protocol = Protocol::Session;
  } else if (args.protocol.rfind("set", 0) == 0) {
    protocol = Protocol::ActionSet;
    set_size = 20;
    const auto colon = args.protocol.find(':');
    if (colon != std::string::npos) set_size = std::stoi(args.protocol.substr(colon + 1));
    if (set_size < 1) throw Error("set size must be >= 1");
  } else {
    throw Error("unknown protocol '" + args.protocol + "' (action | set:k | session)");
  }

  ForestOptions opt;
  opt.num_trees = cfg.trees;
  opt.probability_mode = cfg.probability_mode();
  const int jobs = cfg.jobs;
  std::filesystem::create_directories(cfg.out);

  // Claim every output path before any expensive work.
  auto claim = [&](const std::string& name) {
    const auto path = cfg.out / name;
    ensure_writable(path, cfg.force);
    return path;
  };

  nlohmann::json extra{{"scenario", args.scenario}, {"protocol", args.protocol}};
  if (!args.kind.empty()) extra["kind"] = args.kind;
  if (args.smoothing) extra["smoothing"] = true;
  const ReportStamp stamp{cfg.seed, config_hash(cfg, "run", extra)};
  nlohmann::json results;

  if (args.scenario == "A") {
    if (!args.kind.empty()) {
      const auto csv = claim("scenarioA_" + args.kind + ".csv");
      const auto json = claim("scenarioA_" + args.kind + ".json");
      ActionKind kind = args.kind == "MM"   ? ActionKind::MM
                        : args.kind == "PC" ? ActionKind::PC
                                            : ActionKind::DD;
      const auto folds_csv = claim("scenarioA_" + args.kind + "_folds.csv");
      const auto pool = training_pool(cfg, args.features_train);
      std::map<int, CvScores> cv;
      const PerUserTable table = scenario_a_by_type(pool, kind, 10, cfg.seed, opt, jobs, &cv);
      write_user_table_csv(csv, table);
      write_fold_assignments_csv(folds_csv, cv);
      write_report_json(json, table.mean, &stamp);
      std::printf("scenario A %s: avg ACC %.2f, avg AUC %.4f\n", args.kind.c_str(),
                  table.mean.acc, table.mean.auc);
    } else if (protocol == Protocol::Action) {
      const auto csv = claim("scenarioA_action.csv");
      const auto json = claim("scenarioA_action.json");
      const auto folds_csv = claim("scenarioA_action_folds.csv");
      const auto pool = training_pool(cfg, args.features_train);
      std::map<int, CvScores> cv;
      const PerUserTable table = scenario_a_action(pool, 10, cfg.seed, opt, jobs, &cv);
      write_user_table_csv(csv, table);
      write_fold_assignments_csv(folds_csv, cv);
      write_report_json(json, table.mean, &stamp);
      std::printf("scenario A action: avg ACC %.2f, avg AUC %.4f\n", table.mean.acc,
                  table.mean.auc);
    } else if (protocol == Protocol::ActionSet) {
      const auto csv = claim("scenarioA_set.csv");
      const auto pool = training_pool(cfg, args.features_train);
      const auto curve = scenario_a_action_set(pool, 1, set_size, 10, cfg.seed, opt, jobs);
      write_set_curve_csv(csv, curve);
      for (const auto& row : curve) {
        std::printf("k=%2d  AUC %.4f  EER %.4f\n", row.k, row.auc, row.eer);
      }
    } else {
      throw Error("scenario A supports protocols action and set:k");
    }
  } else if (args.scenario == "B") {
    std::map<int, std::vector<ActionFeatures>> train;
    std::vector<TestSessionFeatures> test;
    std::map<int, std::vector<MouseAction>> train_actions;
    std::vector<TestSessionActions> test_actions;
    if (!args.features_train.empty() && !args.features_test.empty() && !args.smoothing) {
      train = group_by_user(read_features_csv(args.features_train));
      test = group_by_session(read_features_csv(args.features_test));
    } else {
      // The smoothing experiment resamples raw actions itself.
      const ResampleConfig rs = args.smoothing ? ResampleConfig{cfg.hz, ResampleMethod::None}
                                               : cfg.resample();
      PipelineData d = load_pipeline_data(cfg, true, rs);
      train = std::move(d.train_features);
      test = std::move(d.test_features);
      train_actions = std::move(d.train_actions);
      test_actions = std::move(d.test_actions);
    }
    if (test.empty() && test_actions.empty()) {
      throw Error("scenario B needs labelled test sessions (corpus or --features-test)");
    }

    if (args.smoothing) {
      const auto path = claim("smoothing.csv");
      const std::vector<ResampleConfig> cfgs = {{cfg.hz, ResampleMethod::None},
                                                {cfg.hz, ResampleMethod::Linear},
                                                {cfg.hz, ResampleMethod::CubicSpline}};
      const auto rows = smoothing_experiment(train_actions, test_actions, cfgs, cfg.seed, opt,
                                             jobs);
      std::ofstream outf(path, std::ios::binary);
      outf << "method,hz,auc,eer,n_scores\n";
      for (const auto& row : rows) {
        outf << to_string(row.config.method) << ',' << row.config.frequency_hz << ','
             << row.report.auc << ',' << row.report.eer << ',' << row.n_scores << '\n';
        std::printf("%-7s AUC %.4f  EER %.4f  (%lld scores)\n", to_string(row.config.method),
                    row.report.auc, row.report.eer, static_cast<long long>(row.n_scores));
      }
    } else {
      const auto report_path = claim("report.json");
      const auto roc_path = claim("roc.csv");
      const auto table_path =
          protocol == Protocol::Action      ? claim("scenarioB_action.csv")
          : protocol == Protocol::ActionSet ? claim("scenarioB_set.csv")
                                            : std::filesystem::path();
      const ScenarioBResult result =
          scenario_b(train, test, protocol, set_size, cfg.seed, opt, jobs);
      if (protocol == Protocol::Action) {
        write_user_table_csv(table_path, result.per_user);
        std::printf("scenario B action: avg ACC %.2f, avg AUC %.4f\n", result.per_user.mean.acc,
                    result.per_user.mean.auc);
      } else if (protocol == Protocol::ActionSet) {
        write_set_curve_csv(table_path, result.set_curve);
        for (const auto& row : result.set_curve) {
          std::printf("k=%2d  AUC %.4f  EER %.4f\n", row.k, row.auc, row.eer);
        }
      } else {
        std::printf("scenario B session: %lld scores, AUC %.4f, EER %.4f\n",
                    static_cast<long long>(result.n_scores), result.global.auc,
                    result.global.eer);
      }
      write_report_json(report_path, result.global, &stamp);
      write_roc_csv(roc_path, result.roc);
      results["n_scores"] = result.n_scores;
    }
  } else {
    throw Error("unknown scenario '" + args.scenario + "' (A | B)");
  }

  write_manifest(cfg, "run", extra, results);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Mouse-dynamics impostor detection pipeline"};
  app.require_subcommand(1);
  app.fallthrough();  // global flags may follow the subcommand name

  GlobalConfig cfg;
  app.add_option("--data-root", cfg.data_root, "Corpus root directory")
      ->envname("MOUSEDYN_DATA_ROOT");
  app.add_option("--labels", cfg.labels, "Test labels CSV (default: <root>/public_labels.csv)")
      ->envname("MOUSEDYN_LABELS");
  app.add_option("--seed", cfg.seed, "Master seed")->envname("MOUSEDYN_SEED");
  app.add_option("--trees", cfg.trees, "Trees per forest")->envname("MOUSEDYN_TREES");
  app.add_option("--resample", cfg.resample_method, "none | linear | spline")
      ->check(CLI::IsMember({"none", "linear", "spline"}))
      ->envname("MOUSEDYN_RESAMPLE");
  app.add_option("--hz", cfg.hz, "Resampling frequency")->envname("MOUSEDYN_HZ");
  app.add_option("--prob-mode", cfg.prob_mode,
                 "Per-action probability: vote (tree vote fraction) | mean-leaf")
      ->check(CLI::IsMember({"vote", "mean-leaf"}))
      ->envname("MOUSEDYN_PROB_MODE");
  app.add_option("--out", cfg.out, "Output directory (or file for fetch/train)")
      ->envname("MOUSEDYN_OUT");
  app.add_option("--jobs", cfg.jobs, "Worker threads (0 = all cores)")
      ->envname("MOUSEDYN_JOBS");
  app.add_flag("--force", cfg.force, "Overwrite existing outputs");
  app.add_option("--max-x", cfg.max_x, "Largest legal x coordinate");
  app.add_option("--max-y", cfg.max_y, "Largest legal y coordinate");
  app.add_flag("--lenient-tokens", cfg.lenient_tokens,
               "Map unknown button/state tokens to NoButton/Move instead of failing");
  app.add_flag("--dedup-coords", cfg.dedup_coords,
               "Treat events differing only in ctime as duplicates during cleaning");

  // fetch
  auto* fetch = app.add_subcommand("fetch", "Download the corpus archive and verify its hash");
  std::string url, sha256;
  bool extract = false;
  fetch->add_option("--url", url, "Archive URL")->required();
  fetch->add_option("--sha256", sha256, "Expected hex SHA-256 of the archive");
  fetch->add_flag("--extract", extract, "Extract the .zip next to it after verification");

  // stats
  auto* stats = app.add_subcommand("stats", "Corpus statistics (sessions, action types)");

  // segment
  auto* seg = app.add_subcommand("segment", "Segment the corpus and write actions.csv");

  // features
  auto* feat = app.add_subcommand("features", "Extract feature CSVs for both corpus parts");

  // train
  auto* train = app.add_subcommand("train", "Train one user's forest and save the model");
  int train_user = -1;
  std::filesystem::path train_csv;
  train->add_option("--user", train_user, "Genuine user id")->required();
  train->add_option("--features-train", train_csv, "Training features CSV (skips raw parsing)");

  // run
  auto* run = app.add_subcommand("run", "Run an evaluation scenario and write reports");
  RunArgs run_args;
  run->add_option("--scenario", run_args.scenario, "A | B")
      ->check(CLI::IsMember({"A", "B"}));
  run->add_option("--protocol", run_args.protocol, "action | set:k | session");
  run->add_option("--kind", run_args.kind, "Restrict scenario A to MM | PC | DD")
      ->check(CLI::IsMember({"MM", "PC", "DD"}));
  run->add_flag("--smoothing", run_args.smoothing,
                "Scenario B session protocol once per resampling method");
  run->add_option("--features-train", run_args.features_train, "Training features CSV");
  run->add_option("--features-test", run_args.features_test, "Test features CSV");

  // rank-features
  auto* rank = app.add_subcommand("rank-features", "Gain-ratio feature ranking");
  int rank_user = -1;
  std::filesystem::path rank_csv;
  rank->add_option("--user", rank_user, "Rank on one user's balanced dataset (default: pooled)");
  rank->add_option("--features-train", rank_csv, "Training features CSV (skips raw parsing)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (fetch->parsed()) return cmd_fetch(cfg, url, sha256, extract);
    if (stats->parsed()) return cmd_stats(cfg);
    if (seg->parsed()) return cmd_segment(cfg);
    if (feat->parsed()) return cmd_features(cfg);
    if (train->parsed()) return cmd_train(cfg, train_user, train_csv);
    if (run->parsed()) return cmd_run(cfg, run_args);
    if (rank->parsed()) return cmd_rank_features(cfg, rank_user, rank_csv);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
