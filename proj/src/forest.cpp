#include "mousedyn/forest.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include <nlohmann/json.hpp>

#include "mousedyn/errors.hpp"
#include "mousedyn/parallel.hpp"
#include "mousedyn/rng.hpp"

namespace mousedyn {

UserDataset build_user_dataset(const std::map<int, std::vector<ActionFeatures>>& all_features,
                               int genuine_user, std::uint64_t seed) {
  if (all_features.size() < 2) throw NotEnoughUsers();
  auto it = all_features.find(genuine_user);
  if (it == all_features.end() || it->second.empty()) {
    throw InsufficientData("user " + std::to_string(genuine_user) + " has no actions");
  }
  const std::size_t n_genuine = it->second.size();
  const std::size_t n_impostor_users = all_features.size() - 1;

  UserDataset ds;
  ds.genuine_user = genuine_user;
  ds.rows.reserve(2 * n_genuine);
  for (const ActionFeatures& f : it->second) {
    ds.rows.push_back(f);
    ds.rows.back().genuine = true;
  }

  Rng rng(derive_seed(seed, {kStreamDataset, static_cast<std::uint64_t>(genuine_user)}));
  const std::size_t base = n_genuine / n_impostor_users;
  const std::size_t rem = n_genuine % n_impostor_users;

  std::size_t impostor_rank = 0;
  for (const auto& [user, rows] : all_features) {
    if (user == genuine_user) continue;
    const std::size_t quota = base + (impostor_rank < rem ? 1 : 0);
    ++impostor_rank;
    if (quota == 0) continue;

    if (rows.empty()) {
      throw InsufficientData("impostor user " + std::to_string(user) + " has no actions");
    }
    std::vector<std::size_t> picks;
    picks.reserve(quota);
    if (rows.size() >= quota) {
      // Partial Fisher-Yates over the index range.
      std::vector<std::size_t> idx(rows.size());
      for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
      for (std::size_t i = 0; i < quota; ++i) {
        std::size_t k = i + static_cast<std::size_t>(rng.next_below(idx.size() - i));
        std::swap(idx[i], idx[k]);
        picks.push_back(idx[i]);
      }
    } else {
      std::fprintf(stderr,
                   "warning: user %d has %zu actions, quota %zu for genuine user %d; "
                   "sampling with replacement\n",
                   user, rows.size(), quota, genuine_user);
      for (std::size_t i = 0; i < quota; ++i) {
        picks.push_back(static_cast<std::size_t>(rng.next_below(rows.size())));
      }
    }
    std::sort(picks.begin(), picks.end());  // keep impostor rows in temporal order
    for (std::size_t i : picks) {
      ds.rows.push_back(rows[i]);
      ds.rows.back().genuine = false;
    }
  }

  ds.labels.resize(ds.rows.size());
  for (std::size_t i = 0; i < ds.rows.size(); ++i) {
    ds.labels[i] = ds.rows[i].genuine ? 1 : 0;
  }
  return ds;
}

namespace {

constexpr int kCandidateFeatures = 6;  // floor(log2(39)) + 1

struct TreeTrainer {
  const std::vector<double>& x;  // row-major nrows x kFeatureCount
  const std::vector<std::uint8_t>& y;
  Rng rng;
  DecisionTree tree;
  std::vector<std::uint32_t> samples;  // bootstrap row ids, partitioned in place

  // scratch
  std::vector<std::pair<double, std::uint8_t>> sorted;
  std::array<int, kFeatureCount> feature_pool{};

  double value(std::uint32_t row, int f) const { return x[row * kFeatureCount + f]; }

  struct Split {
    int feature = -1;
    double threshold = 0.0;
    std::uint64_t mask = 0;
    double impurity = 0.0;  // weighted child Gini
    bool valid = false;
  };

  static double gini(std::size_t pos, std::size_t total) {
    if (total == 0) return 0.0;
    const double p = static_cast<double>(pos) / static_cast<double>(total);
    return 2.0 * p * (1.0 - p);
  }

  // Best Gini split of samples[begin..end) on feature f, or invalid when the
  // feature is constant there.
  Split best_split_on(int f, std::size_t begin, std::size_t end, std::size_t pos_total) {
    const std::size_t n = end - begin;
    Split best;
    best.feature = f;
    best.impurity = std::numeric_limits<double>::infinity();

    if (feature_is_categorical(f)) {
      // For a binary target the optimal subset split is a prefix once
      // categories are ordered by genuine rate.
      const int card = feature_cardinality(f);
      std::array<std::size_t, 16> cnt{}, pos{};
      for (std::size_t i = begin; i < end; ++i) {
        const int code = static_cast<int>(std::llround(value(samples[i], f)));
        ++cnt[code];
        pos[code] += y[samples[i]];
      }
      std::array<int, 16> order{};
      int n_cats = 0;
      for (int c = 0; c < card; ++c) {
        if (cnt[c] > 0) order[n_cats++] = c;
      }
      if (n_cats < 2) return best;
      std::sort(order.begin(), order.begin() + n_cats, [&](int a, int b) {
        const double ra = static_cast<double>(pos[a]) / static_cast<double>(cnt[a]);
        const double rb = static_cast<double>(pos[b]) / static_cast<double>(cnt[b]);
        if (ra != rb) return ra < rb;
        return a < b;
      });
      std::size_t left_n = 0, left_pos = 0;
      std::uint64_t mask = 0;
      for (int cut = 0; cut + 1 < n_cats; ++cut) {
        const int c = order[cut];
        left_n += cnt[c];
        left_pos += pos[c];
        mask |= 1ULL << c;
        const std::size_t right_n = n - left_n;
        const std::size_t right_pos = pos_total - left_pos;
        const double w = (static_cast<double>(left_n) * gini(left_pos, left_n) +
                          static_cast<double>(right_n) * gini(right_pos, right_n)) /
                         static_cast<double>(n);
        if (w < best.impurity) {
          best.impurity = w;
          best.mask = mask;
          best.valid = true;
        }
      }
      return best;
    }

    sorted.clear();
    sorted.reserve(n);
    for (std::size_t i = begin; i < end; ++i) {
      sorted.emplace_back(value(samples[i], f), y[samples[i]]);
    }
    std::sort(sorted.begin(), sorted.end());
    if (sorted.front().first == sorted.back().first) return best;

    std::size_t left_n = 0, left_pos = 0;
    for (std::size_t i = 0; i + 1 < n; ++i) {
      left_n += 1;
      left_pos += sorted[i].second;
      if (sorted[i].first == sorted[i + 1].first) continue;
      const std::size_t right_n = n - left_n;
      const std::size_t right_pos = pos_total - left_pos;
      const double w = (static_cast<double>(left_n) * gini(left_pos, left_n) +
                        static_cast<double>(right_n) * gini(right_pos, right_n)) /
                       static_cast<double>(n);
      if (w < best.impurity) {
        best.impurity = w;
        best.threshold = sorted[i].first + (sorted[i + 1].first - sorted[i].first) / 2.0;
        // Guard against midpoint rounding up to the right value.
        if (best.threshold >= sorted[i + 1].first) best.threshold = sorted[i].first;
        best.valid = true;
      }
    }
    return best;
  }

  Split find_split(std::size_t begin, std::size_t end, std::size_t pos_total) {
    for (int i = 0; i < kFeatureCount; ++i) feature_pool[i] = i;
    Split best;
    best.impurity = std::numeric_limits<double>::infinity();
    for (int i = 0; i < kCandidateFeatures; ++i) {
      const int k = i + static_cast<int>(rng.next_below(kFeatureCount - i));
      std::swap(feature_pool[i], feature_pool[k]);
      Split s = best_split_on(feature_pool[i], begin, end, pos_total);
      if (s.valid && s.impurity < best.impurity) best = s;
    }
    if (!best.valid) {
      // No candidate feature was splittable; scan the rest before giving up.
      for (int i = kCandidateFeatures; i < kFeatureCount; ++i) {
        Split s = best_split_on(feature_pool[i], begin, end, pos_total);
        if (s.valid && s.impurity < best.impurity) best = s;
      }
    }
    return best;
  }

  bool goes_left(std::uint32_t row, const Split& s) const {
    if (feature_is_categorical(s.feature)) {
      const int code = static_cast<int>(std::llround(value(row, s.feature)));
      return (s.mask >> code) & 1;
    }
    return value(row, s.feature) <= s.threshold;
  }

  void build(std::size_t nrows) {
    samples.resize(nrows);
    for (std::size_t i = 0; i < nrows; ++i) {
      samples[i] = static_cast<std::uint32_t>(rng.next_below(nrows));
    }

    struct Work {
      std::int32_t node;
      std::size_t begin, end;
    };
    std::vector<Work> stack;
    tree.nodes.emplace_back();
    stack.push_back({0, 0, nrows});

    while (!stack.empty()) {
      Work w = stack.back();
      stack.pop_back();
      std::size_t pos_total = 0;
      for (std::size_t i = w.begin; i < w.end; ++i) pos_total += y[samples[i]];
      const std::size_t n = w.end - w.begin;

      TreeNode& preview = tree.nodes[w.node];
      preview.p_genuine = static_cast<double>(pos_total) / static_cast<double>(n);
      if (n < 2 || pos_total == 0 || pos_total == n) continue;  // leaf

      Split s = find_split(w.begin, w.end, pos_total);
      if (!s.valid) continue;  // all features constant: leaf

      auto mid_it = std::partition(samples.begin() + w.begin, samples.begin() + w.end,
                                   [&](std::uint32_t r) { return goes_left(r, s); });
      const std::size_t mid = static_cast<std::size_t>(mid_it - samples.begin());

      const auto li = static_cast<std::int32_t>(tree.nodes.size());
      tree.nodes.emplace_back();
      const auto ri = static_cast<std::int32_t>(tree.nodes.size());
      tree.nodes.emplace_back();
      TreeNode& node = tree.nodes[w.node];
      node.feature = s.feature;
      node.threshold = s.threshold;
      node.category_mask = s.mask;
      node.left = li;
      node.right = ri;
      // Right child first so the left subtree is laid out before it.
      stack.push_back({ri, mid, w.end});
      stack.push_back({li, w.begin, mid});
    }
  }
};

double tree_leaf_probability(const DecisionTree& t, const std::array<double, kFeatureCount>& v) {
  std::int32_t i = 0;
  for (;;) {
    const TreeNode& n = t.nodes[static_cast<std::size_t>(i)];
    if (n.feature < 0) return n.p_genuine;
    bool left;
    if (feature_is_categorical(n.feature)) {
      const int code = static_cast<int>(std::llround(v[static_cast<std::size_t>(n.feature)]));
      left = (n.category_mask >> code) & 1;
    } else {
      left = v[static_cast<std::size_t>(n.feature)] <= n.threshold;
    }
    i = left ? n.left : n.right;
  }
}

}  // namespace

ForestModel train_forest(const UserDataset& data, const ForestOptions& options,
                         std::uint64_t seed) {
  const std::size_t n = data.rows.size();
  if (n < 4) throw DegenerateData("need at least 2 rows per class");
  std::size_t pos = 0;
  for (std::uint8_t l : data.labels) pos += l;
  if (pos < 2 || n - pos < 2) throw DegenerateData("need at least 2 rows per class");
  if (options.num_trees < 1) throw Error("num_trees must be positive");

  // Flatten once; trees share the matrix.
  std::vector<double> x(n * kFeatureCount);
  for (std::size_t r = 0; r < n; ++r) {
    for (int f = 0; f < kFeatureCount; ++f) {
      x[r * kFeatureCount + f] = data.rows[r].values[static_cast<std::size_t>(f)];
    }
  }

  ForestModel model;
  model.seed = seed;
  model.probability_mode = options.probability_mode;
  model.genuine_user = data.genuine_user;
  const auto& names = feature_names();
  model.feature_schema.assign(names.begin(), names.end());
  model.trees.resize(static_cast<std::size_t>(options.num_trees));

  parallel_for(static_cast<std::size_t>(options.num_trees), options.jobs, [&](std::size_t t) {
    TreeTrainer trainer{x, data.labels, Rng(derive_seed(seed, {kStreamTree, t})), {}, {}, {}, {}};
    trainer.build(n);
    model.trees[t] = std::move(trainer.tree);
  });
  return model;
}

double predict_proba(const ForestModel& model, const ActionFeatures& features) {
  if (model.feature_schema.size() != static_cast<std::size_t>(kFeatureCount)) {
    throw SchemaMismatch("model has " + std::to_string(model.feature_schema.size()) +
                         " features, expected " + std::to_string(kFeatureCount));
  }
  if (model.trees.empty()) throw Error("model has no trees");

  double acc = 0.0;
  for (const DecisionTree& t : model.trees) {
    const double p = tree_leaf_probability(t, features.values);
    if (model.probability_mode == ProbabilityMode::VoteFraction) {
      acc += p > 0.5 ? 1.0 : 0.0;
    } else {
      acc += p;
    }
  }
  return acc / static_cast<double>(model.trees.size());
}

double score_action_set(const ForestModel& model, std::span<const ActionFeatures> actions) {
  if (actions.empty()) throw EmptySet();
  double sum = 0.0;
  for (const ActionFeatures& a : actions) sum += predict_proba(model, a);
  return sum / static_cast<double>(actions.size());
}

// ---- persistence ----

namespace {
constexpr int kModelFormatVersion = 1;

std::uint64_t schema_hash(const std::vector<std::string>& names) {
  std::uint64_t h = 1469598103934665603ULL;  // FNV-1a
  for (const std::string& n : names) {
    for (char c : n) {
      h ^= static_cast<unsigned char>(c);
      h *= 1099511628211ULL;
    }
    h ^= '\n';
    h *= 1099511628211ULL;
  }
  return h;
}
}  // namespace

void save_model(const ForestModel& model, const std::filesystem::path& path) {
  nlohmann::json doc;
  doc["format"] = "mousedyn-forest";
  doc["version"] = kModelFormatVersion;
  doc["schema"] = model.feature_schema;
  doc["schema_hash"] = schema_hash(model.feature_schema);
  doc["seed"] = model.seed;
  doc["genuine_user"] = model.genuine_user;
  doc["probability_mode"] =
      model.probability_mode == ProbabilityMode::VoteFraction ? "vote" : "mean_leaf";
  // Model card: how non-numeric features enter the trees.
  {
    nlohmann::json cats = nlohmann::json::array();
    for (int f = 0; f < kFeatureCount; ++f) {
      if (feature_is_categorical(f)) cats.push_back(feature_names()[static_cast<std::size_t>(f)]);
    }
    doc["categorical_features"] = std::move(cats);
    doc["categorical_encoding"] = "subset split: node mask bit(round(value)) routes left";
  }
  nlohmann::json trees = nlohmann::json::array();
  for (const DecisionTree& t : model.trees) {
    nlohmann::json nodes = nlohmann::json::array();
    for (const TreeNode& n : t.nodes) {
      nodes.push_back({n.feature, n.threshold, n.category_mask, n.left, n.right, n.p_genuine});
    }
    trees.push_back(std::move(nodes));
  }
  doc["trees"] = std::move(trees);

  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write model file: " + path.string());
  out << doc.dump();
}

ForestModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open model file: " + path.string());
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw Error("cannot parse model file " + path.string() + ": " + e.what());
  }
  if (doc.value("format", "") != "mousedyn-forest" ||
      doc.value("version", 0) != kModelFormatVersion) {
    throw Error("unrecognized model format in " + path.string());
  }

  ForestModel model;
  model.feature_schema = doc.at("schema").get<std::vector<std::string>>();
  const auto& names = feature_names();
  if (model.feature_schema.size() != names.size() ||
      !std::equal(names.begin(), names.end(), model.feature_schema.begin()) ||
      doc.at("schema_hash").get<std::uint64_t>() != schema_hash(model.feature_schema)) {
    throw SchemaMismatch("model " + path.string() + " was trained with a different schema");
  }
  model.seed = doc.at("seed").get<std::uint64_t>();
  model.genuine_user = doc.value("genuine_user", 0);
  model.probability_mode = doc.value("probability_mode", "vote") == std::string("vote")
                               ? ProbabilityMode::VoteFraction
                               : ProbabilityMode::MeanLeafProbability;
  for (const auto& tnodes : doc.at("trees")) {
    DecisionTree t;
    t.nodes.reserve(tnodes.size());
    for (const auto& jn : tnodes) {
      TreeNode n;
      n.feature = jn.at(0).get<std::int32_t>();
      n.threshold = jn.at(1).get<double>();
      n.category_mask = jn.at(2).get<std::uint64_t>();
      n.left = jn.at(3).get<std::int32_t>();
      n.right = jn.at(4).get<std::int32_t>();
      n.p_genuine = jn.at(5).get<double>();
      t.nodes.push_back(n);
    }
    // Structural validation so a corrupt file cannot send prediction out of
    // bounds.
    const auto size = static_cast<std::int32_t>(t.nodes.size());
    for (const TreeNode& n : t.nodes) {
      if (n.feature >= kFeatureCount ||
          (n.feature >= 0 && (n.left < 0 || n.left >= size || n.right < 0 || n.right >= size))) {
        throw Error("corrupt tree structure in " + path.string());
      }
    }
    if (t.nodes.empty()) throw Error("corrupt tree structure in " + path.string());
    model.trees.push_back(std::move(t));
  }
  if (model.trees.empty()) throw Error("model has no trees: " + path.string());
  return model;
}

}  // namespace mousedyn
