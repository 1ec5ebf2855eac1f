#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "mousedyn/features.hpp"

namespace mousedyn {

/// Balanced per-user training set: the genuine user's N rows labelled
/// genuine plus N impostor rows drawn evenly from the other users.
struct UserDataset {
  int genuine_user = 0;
  std::vector<ActionFeatures> rows;
  std::vector<std::uint8_t> labels;  // 1 = genuine; mirrors rows[i].genuine
};

/// Draws N_i/(n-1) impostor actions per impostor user (remainder spread over
/// the lowest user ids), sampled without replacement from a stream derived
/// from (seed, genuine_user). Users short of their quota are sampled with
/// replacement and a warning is printed.
UserDataset build_user_dataset(const std::map<int, std::vector<ActionFeatures>>& all_features,
                               int genuine_user, std::uint64_t seed);

enum class ProbabilityMode {
  VoteFraction,     // fraction of trees whose leaf majority is genuine
  MeanLeafProbability,
};

struct ForestOptions {
  int num_trees = 100;
  ProbabilityMode probability_mode = ProbabilityMode::VoteFraction;
  int jobs = 1;  // tree-level parallelism; streams are per-tree so results do not depend on it
};

struct TreeNode {
  std::int32_t feature = -1;  // -1 marks a leaf
  double threshold = 0.0;     // numeric split: x <= threshold goes left
  std::uint64_t category_mask = 0;  // categorical split: bit(code) set goes left
  std::int32_t left = -1;
  std::int32_t right = -1;
  double p_genuine = 0.0;  // leaf only: genuine fraction of training rows
};

struct DecisionTree {
  std::vector<TreeNode> nodes;
};

struct ForestModel {
  std::vector<DecisionTree> trees;
  std::vector<std::string> feature_schema;
  std::uint64_t seed = 0;
  ProbabilityMode probability_mode = ProbabilityMode::VoteFraction;
  int genuine_user = 0;
};

/// Bagged CART trees: each trained on a bootstrap sample, Gini splits over
/// floor(log2(39)) + 1 randomly drawn candidate features per node, grown to
/// purity. Deterministic for a given seed regardless of options.jobs.
ForestModel train_forest(const UserDataset& data, const ForestOptions& options,
                         std::uint64_t seed);

/// Genuine-class probability for one action, in [0, 1].
double predict_proba(const ForestModel& model, const ActionFeatures& features);

/// Score fusion over a set of actions: the mean of the per-action
/// probabilities.
double score_action_set(const ForestModel& model, std::span<const ActionFeatures> actions);

void save_model(const ForestModel& model, const std::filesystem::path& path);
ForestModel load_model(const std::filesystem::path& path);

/// Gain-ratio ranking of all features against a class label. Numeric
/// features are discretized by entropy minimization with the MDL stopping
/// rule first. Returns (feature, gain_ratio) sorted descending, ties broken
/// by name.
std::vector<std::pair<std::string, double>> gain_ratio_ranking(
    std::span<const ActionFeatures> rows, std::span<const int> labels);

/// Binary-label convenience (genuine/impostor datasets).
std::vector<std::pair<std::string, double>> gain_ratio_ranking(
    std::span<const ActionFeatures> rows, std::span<const std::uint8_t> labels);

inline std::vector<std::pair<std::string, double>> gain_ratio_ranking(const UserDataset& data) {
  return gain_ratio_ranking(data.rows, std::span<const std::uint8_t>(data.labels));
}

/// Ranking over the pooled training rows with the user identity as the
/// class: one global informativeness table for the whole corpus.
std::vector<std::pair<std::string, double>> gain_ratio_ranking_by_user(
    const std::map<int, std::vector<ActionFeatures>>& features);

}  // namespace mousedyn
