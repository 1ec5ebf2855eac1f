#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <set>

#include "mousedyn/errors.hpp"
#include "mousedyn/forest.hpp"
#include "mousedyn/rng.hpp"
#include "synthetic.hpp"

using namespace mousedyn;
using doctest::Approx;

namespace {

ActionFeatures row_for_user(Rng& rng, int uid) {
  ActionFeatures f = testing::gaussian_rows(rng, 1, false, 0.0)[0];
  f.user_id = uid;
  f.genuine = true;
  return f;
}

std::map<int, std::vector<ActionFeatures>> uniform_users(Rng& rng, std::vector<int> users,
                                                         int rows_each) {
  std::map<int, std::vector<ActionFeatures>> out;
  for (int u : users) {
    for (int i = 0; i < rows_each; ++i) out[u].push_back(row_for_user(rng, u));
  }
  return out;
}

}  // namespace

TEST_CASE("balanced dataset: quota split across impostor users") {
  Rng rng(3);
  auto features = uniform_users(rng, {1, 2, 3, 4, 5, 6, 7, 8, 9, 10}, 600);
  features[1].resize(450);  // genuine user: 450 actions, 50 per impostor

  const UserDataset ds = build_user_dataset(features, 1, 99);
  CHECK(ds.genuine_user == 1);
  REQUIRE(ds.rows.size() == 900);
  std::size_t genuine = 0;
  std::map<int, int> impostor_counts;
  for (std::size_t i = 0; i < ds.rows.size(); ++i) {
    if (ds.labels[i]) {
      ++genuine;
      CHECK(ds.rows[i].user_id == 1);
    } else {
      ++impostor_counts[ds.rows[i].user_id];
    }
  }
  CHECK(genuine == 450);
  REQUIRE(impostor_counts.size() == 9);
  for (const auto& [user, count] : impostor_counts) CHECK(count == 50);
}

TEST_CASE("balanced dataset: remainder goes to the lowest user ids") {
  Rng rng(5);
  auto features = uniform_users(rng, {1, 2, 3, 4}, 100);
  features[1].resize(11);  // 11 impostors over 3 users: 4, 4, 3

  const UserDataset ds = build_user_dataset(features, 1, 7);
  std::map<int, int> impostor_counts;
  for (std::size_t i = 0; i < ds.rows.size(); ++i) {
    if (!ds.labels[i]) ++impostor_counts[ds.rows[i].user_id];
  }
  CHECK(impostor_counts[2] == 4);
  CHECK(impostor_counts[3] == 4);
  CHECK(impostor_counts[4] == 3);
}

TEST_CASE("two users: all impostor rows come from the other user") {
  Rng rng(7);
  auto features = uniform_users(rng, {1, 2}, 50);
  const UserDataset ds = build_user_dataset(features, 1, 7);
  CHECK(ds.rows.size() == 100);
  for (std::size_t i = 0; i < ds.rows.size(); ++i) {
    if (!ds.labels[i]) CHECK(ds.rows[i].user_id == 2);
  }
}

TEST_CASE("dataset construction is deterministic for a fixed seed") {
  Rng rng(11);
  auto features = uniform_users(rng, {1, 2, 3}, 80);
  const UserDataset a = build_user_dataset(features, 2, 1234);
  const UserDataset b = build_user_dataset(features, 2, 1234);
  REQUIRE(a.rows.size() == b.rows.size());
  for (std::size_t i = 0; i < a.rows.size(); ++i) {
    CHECK(a.labels[i] == b.labels[i]);
    CHECK(a.rows[i].values == b.rows[i].values);
  }
  const UserDataset c = build_user_dataset(features, 2, 1235);
  bool any_difference = false;
  for (std::size_t i = 0; i < a.rows.size() && !any_difference; ++i) {
    if (a.rows[i].values != c.rows[i].values) any_difference = true;
  }
  CHECK(any_difference);
}

TEST_CASE("fewer than two users is an error") {
  Rng rng(13);
  auto features = uniform_users(rng, {1}, 10);
  CHECK_THROWS_AS(build_user_dataset(features, 1, 1), NotEnoughUsers);
}

TEST_CASE("short impostor pools are sampled with replacement") {
  Rng rng(17);
  auto features = uniform_users(rng, {1, 2}, 60);
  features[2].resize(10);  // quota is 60
  const UserDataset ds = build_user_dataset(features, 1, 3);
  std::size_t impostors = 0;
  for (auto l : ds.labels) impostors += l ? 0 : 1;
  CHECK(impostors == 60);

  // An impostor with no actions at all cannot fill any quota.
  features[2].clear();
  CHECK_THROWS_AS(build_user_dataset(features, 1, 3), InsufficientData);
}

TEST_CASE("corrupt model files are rejected on load") {
  Rng rng(59);
  UserDataset ds;
  ds.genuine_user = 1;
  for (const auto& r : testing::gaussian_rows(rng, 40, true, 3.0)) {
    ds.rows.push_back(r);
    ds.labels.push_back(1);
  }
  for (const auto& r : testing::gaussian_rows(rng, 40, false, 3.0)) {
    ds.rows.push_back(r);
    ds.labels.push_back(0);
  }
  ForestOptions opt;
  opt.num_trees = 3;
  ForestModel model = train_forest(ds, opt, 1);
  const auto dir = std::filesystem::temp_directory_path() / "mousedyn_models";
  std::filesystem::create_directories(dir);

  // Child index out of range.
  model.trees[0].nodes[0].left = 1 << 20;
  model.trees[0].nodes[0].feature = 0;
  const auto path = dir / "corrupt.json";
  save_model(model, path);
  CHECK_THROWS_AS(load_model(path), Error);
}

TEST_CASE("well-separated clusters train to near-perfect training accuracy") {
  Rng rng(19);
  UserDataset ds;
  ds.genuine_user = 1;
  for (const auto& r : testing::gaussian_rows(rng, 500, true, 4.0)) {
    ds.rows.push_back(r);
    ds.labels.push_back(1);
  }
  for (const auto& r : testing::gaussian_rows(rng, 500, false, 4.0)) {
    ds.rows.push_back(r);
    ds.labels.push_back(0);
  }
  ForestOptions opt;
  opt.num_trees = 30;
  const ForestModel model = train_forest(ds, opt, 42);

  int correct = 0;
  for (std::size_t i = 0; i < ds.rows.size(); ++i) {
    const double p = predict_proba(model, ds.rows[i]);
    if ((p > 0.5) == (ds.labels[i] == 1)) ++correct;
  }
  CHECK(static_cast<double>(correct) / static_cast<double>(ds.rows.size()) > 0.99);
}

TEST_CASE("single-class input is rejected") {
  Rng rng(23);
  UserDataset ds;
  ds.genuine_user = 1;
  for (const auto& r : testing::gaussian_rows(rng, 20, true, 1.0)) {
    ds.rows.push_back(r);
    ds.labels.push_back(1);
  }
  CHECK_THROWS_AS(train_forest(ds, {}, 1), DegenerateData);
}

TEST_CASE("same data and seed give identical predictions") {
  Rng rng(29);
  UserDataset ds;
  ds.genuine_user = 1;
  for (const auto& r : testing::gaussian_rows(rng, 200, true, 1.0)) {
    ds.rows.push_back(r);
    ds.labels.push_back(1);
  }
  for (const auto& r : testing::gaussian_rows(rng, 200, false, 1.0)) {
    ds.rows.push_back(r);
    ds.labels.push_back(0);
  }
  ForestOptions opt;
  opt.num_trees = 20;
  const ForestModel m1 = train_forest(ds, opt, 777);
  opt.jobs = 4;  // parallel tree training must not change the model
  const ForestModel m2 = train_forest(ds, opt, 777);

  const auto probe = testing::gaussian_rows(rng, 50, true, 1.0);
  for (const auto& p : probe) {
    const double a = predict_proba(m1, p);
    const double b = predict_proba(m2, p);
    CHECK(a == b);  // bit-identical
  }
}

TEST_CASE("hand-built three-tree forest votes 2/3") {
  // Trees are stumps on mean_v: two vote genuine for x <= 5, one votes
  // impostor there.
  ForestModel model;
  model.feature_schema.assign(feature_names().begin(), feature_names().end());
  auto stump = [](double leaf_left, double leaf_right) {
    DecisionTree t;
    TreeNode root;
    root.feature = kMeanV;
    root.threshold = 5.0;
    root.left = 1;
    root.right = 2;
    t.nodes.push_back(root);
    TreeNode l;
    l.p_genuine = leaf_left;
    TreeNode r;
    r.p_genuine = leaf_right;
    t.nodes.push_back(l);
    t.nodes.push_back(r);
    return t;
  };
  model.trees.push_back(stump(1.0, 0.0));
  model.trees.push_back(stump(0.9, 0.1));
  model.trees.push_back(stump(0.2, 0.8));

  ActionFeatures probe;
  probe.values[kMeanV] = 3.0;
  CHECK(predict_proba(model, probe) == Approx(2.0 / 3.0));

  // All trees voting genuine gives 1.0.
  probe.values[kMeanV] = 3.0;
  model.trees[2] = stump(0.7, 0.3);
  CHECK(predict_proba(model, probe) == 1.0);

  // Mean-leaf mode averages the leaf probabilities instead.
  model.probability_mode = ProbabilityMode::MeanLeafProbability;
  CHECK(predict_proba(model, probe) == Approx((1.0 + 0.9 + 0.7) / 3.0));
}

TEST_CASE("score_action_set is the mean of the action probabilities") {
  ForestModel model;
  model.feature_schema.assign(feature_names().begin(), feature_names().end());
  // Identity-ish stump: p_genuine = 1 iff mean_v <= 0.5.
  DecisionTree t;
  TreeNode root;
  root.feature = kMeanV;
  root.threshold = 0.5;
  root.left = 1;
  root.right = 2;
  t.nodes.push_back(root);
  TreeNode l;
  l.p_genuine = 1.0;
  TreeNode r;
  r.p_genuine = 0.0;
  t.nodes.push_back(l);
  t.nodes.push_back(r);
  model.trees = {t, t, t, t, t};

  std::vector<ActionFeatures> actions(3);
  actions[0].values[kMeanV] = 0.0;  // score 1.0
  actions[1].values[kMeanV] = 1.0;  // score 0.0
  actions[2].values[kMeanV] = 0.0;  // score 1.0
  CHECK(score_action_set(model, actions) == Approx(2.0 / 3.0));

  // k = 1 equals predict_proba; permutations do not matter.
  CHECK(score_action_set(model, std::span(actions).subspan(0, 1)) ==
        predict_proba(model, actions[0]));
  std::swap(actions[0], actions[1]);
  CHECK(score_action_set(model, actions) == Approx(2.0 / 3.0));

  CHECK_THROWS_AS(score_action_set(model, {}), EmptySet);
}

TEST_CASE("prediction is invariant under probe row order") {
  Rng rng(31);
  UserDataset ds;
  ds.genuine_user = 1;
  for (const auto& r : testing::gaussian_rows(rng, 150, true, 2.0)) {
    ds.rows.push_back(r);
    ds.labels.push_back(1);
  }
  for (const auto& r : testing::gaussian_rows(rng, 150, false, 2.0)) {
    ds.rows.push_back(r);
    ds.labels.push_back(0);
  }
  ForestOptions opt;
  opt.num_trees = 15;
  const ForestModel model = train_forest(ds, opt, 5);
  auto probe = testing::gaussian_rows(rng, 40, true, 2.0);
  std::vector<double> before;
  for (const auto& p : probe) before.push_back(predict_proba(model, p));
  std::reverse(probe.begin(), probe.end());
  for (std::size_t i = 0; i < probe.size(); ++i) {
    CHECK(predict_proba(model, probe[i]) == before[probe.size() - 1 - i]);
  }
}

TEST_CASE("more trees reduce prediction variance across seeds") {
  Rng rng(37);
  UserDataset ds;
  ds.genuine_user = 1;
  for (const auto& r : testing::gaussian_rows(rng, 120, true, 1.0)) {
    ds.rows.push_back(r);
    ds.labels.push_back(1);
  }
  for (const auto& r : testing::gaussian_rows(rng, 120, false, 1.0)) {
    ds.rows.push_back(r);
    ds.labels.push_back(0);
  }
  const ActionFeatures probe = testing::gaussian_rows(rng, 1, true, 1.0)[0];

  auto variance_with_trees = [&](int trees) {
    ForestOptions opt;
    opt.num_trees = trees;
    std::vector<double> scores;
    for (std::uint64_t seed = 0; seed < 30; ++seed) {
      scores.push_back(predict_proba(train_forest(ds, opt, seed), probe));
    }
    double mean = 0.0;
    for (double s : scores) mean += s;
    mean /= static_cast<double>(scores.size());
    double var = 0.0;
    for (double s : scores) var += (s - mean) * (s - mean);
    return var / static_cast<double>(scores.size());
  };
  CHECK(variance_with_trees(64) < variance_with_trees(2));
}

TEST_CASE("model save/load round-trips and checks the schema") {
  Rng rng(41);
  UserDataset ds;
  ds.genuine_user = 9;
  for (const auto& r : testing::gaussian_rows(rng, 100, true, 2.0)) {
    ds.rows.push_back(r);
    ds.labels.push_back(1);
  }
  for (const auto& r : testing::gaussian_rows(rng, 100, false, 2.0)) {
    ds.rows.push_back(r);
    ds.labels.push_back(0);
  }
  ForestOptions opt;
  opt.num_trees = 10;
  const ForestModel model = train_forest(ds, opt, 123);

  const auto dir = std::filesystem::temp_directory_path() / "mousedyn_models";
  std::filesystem::create_directories(dir);
  const auto path = dir / "model.json";
  save_model(model, path);
  const ForestModel loaded = load_model(path);
  CHECK(loaded.genuine_user == 9);
  CHECK(loaded.seed == 123);
  const auto probe = testing::gaussian_rows(rng, 25, false, 2.0);
  for (const auto& p : probe) {
    CHECK(predict_proba(loaded, p) == predict_proba(model, p));
  }

  // Tampering with the schema is rejected.
  ForestModel bad = model;
  bad.feature_schema[0] = "not_a_feature";
  const auto bad_path = dir / "bad.json";
  save_model(bad, bad_path);
  CHECK_THROWS_AS(load_model(bad_path), SchemaMismatch);
}

TEST_CASE("gain ratio: perfect binary predictor scores 1, constants score 0") {
  Rng rng(43);
  std::vector<ActionFeatures> rows;
  std::vector<std::uint8_t> labels;
  for (int i = 0; i < 200; ++i) {
    ActionFeatures f = testing::gaussian_rows(rng, 1, false, 0.0)[0];
    const bool pos = i % 2 == 0;
    f.values[kMeanV] = pos ? 1.0 : 0.0;   // perfect predictor
    f.values[kSdV] = 3.14;                // constant
    rows.push_back(f);
    labels.push_back(pos ? 1 : 0);
  }
  const auto ranking = gain_ratio_ranking(rows, labels);
  REQUIRE(ranking.size() == static_cast<std::size_t>(kFeatureCount));
  CHECK(ranking.front().first == "mean_v");
  CHECK(ranking.front().second == Approx(1.0).epsilon(1e-9));
  double sd_v_score = -1.0;
  for (const auto& [name, gr] : ranking) {
    if (name == "sd_v") sd_v_score = gr;
  }
  CHECK(sd_v_score == 0.0);
  // Descending order.
  for (std::size_t i = 1; i < ranking.size(); ++i) {
    CHECK(ranking[i - 1].second >= ranking[i].second);
  }
}

TEST_CASE("gain ratio handles multiclass labels: user-identity ranking") {
  Rng rng(53);
  std::map<int, std::vector<ActionFeatures>> features;
  for (int u = 1; u <= 3; ++u) {
    for (int i = 0; i < 150; ++i) {
      ActionFeatures f = testing::gaussian_rows(rng, 1, false, 0.0)[0];
      f.values[kElapsedTime] = 5.0 * u + rng.next_gaussian();  // user signature
      f.user_id = u;
      features[u].push_back(std::move(f));
    }
  }
  const auto ranking = gain_ratio_ranking_by_user(features);
  CHECK(ranking.front().first == "elapsed_time");
  CHECK(ranking.front().second > 0.2);

  // Three perfectly separated classes score exactly 1.
  std::vector<ActionFeatures> rows;
  std::vector<int> labels;
  for (int c = 0; c < 3; ++c) {
    for (int i = 0; i < 60; ++i) {
      ActionFeatures f = testing::gaussian_rows(rng, 1, false, 0.0)[0];
      f.values[kMeanA] = static_cast<double>(c);
      rows.push_back(std::move(f));
      labels.push_back(c + 10);
    }
  }
  const auto perfect = gain_ratio_ranking(rows, std::span<const int>(labels));
  CHECK(perfect.front().first == "mean_a");
  CHECK(perfect.front().second == Approx(1.0).epsilon(1e-9));
}

TEST_CASE("gain ratio favors informative features over noise") {
  Rng rng(47);
  std::vector<ActionFeatures> rows;
  std::vector<std::uint8_t> labels;
  for (int i = 0; i < 600; ++i) {
    ActionFeatures f = testing::gaussian_rows(rng, 1, false, 0.0)[0];
    const bool pos = rng.next_below(2) == 0;
    f.values[kABegTime] = rng.next_gaussian() + (pos ? 2.0 : 0.0);
    rows.push_back(f);
    labels.push_back(pos ? 1 : 0);
  }
  const auto ranking = gain_ratio_ranking(rows, labels);
  CHECK(ranking.front().first == "a_beg_time");
  CHECK(ranking.front().second > 0.1);
}
