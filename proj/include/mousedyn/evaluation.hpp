#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "mousedyn/forest.hpp"
#include "mousedyn/resample.hpp"

namespace mousedyn {

struct ScoreSet {
  std::vector<double> positives;
  std::vector<double> negatives;
};

struct RocPoint {
  double threshold = 0.0;
  double fpr = 0.0;
  double fnr = 0.0;
  double tpr = 0.0;
};

struct RocCurve {
  std::vector<RocPoint> points;  // threshold ascending; fpr and tpr non-increasing
  double auc = 0.0;              // rank statistic (value of record), ties count half
  double auc_trapezoid = 0.0;    // area of the swept curve; equals auc up to rounding
  double eer = 0.0;              // rate where fpr == fnr, interpolated between points
  double eer_threshold = 0.0;
};

/// Decision rule is accept iff score >= threshold; thresholds sweep the
/// distinct scores plus sentinels 0, 1 and one cut above every score.
RocCurve compute_roc(const ScoreSet& scores);

enum class Protocol { Action, ActionSet, Session };
enum class Scenario { A, B };

struct EvalReport {
  enum class Scope { PerUser, Global };
  Scope scope = Scope::Global;
  int user_id = -1;        // PerUser only
  double acc = 0.0;        // percent correct at threshold 0.5
  double auc = 0.0;
  double eer = 0.0;
  double fnr = 0.0;
  double fpr = 0.0;
  std::int64_t n_positive = 0;
  std::int64_t n_negative = 0;
  Protocol protocol = Protocol::Action;
  int set_size = 1;  // k for ActionSet
  Scenario scenario = Scenario::A;
};

EvalReport report_from_scores(const ScoreSet& scores, Scenario sc, Protocol pr, int set_size);

/// Held-out scores from seeded stratified cross-validation of one user's
/// balanced dataset. Streams keep dataset row order within each fold so
/// set-based fusion can window them. The fold row assignments (indices into
/// the balanced dataset) are kept for reproducibility reporting.
struct CvScores {
  int user_id = 0;
  std::vector<std::vector<double>> pos_by_fold;
  std::vector<std::vector<double>> neg_by_fold;
  std::vector<std::vector<std::size_t>> pos_rows_by_fold;
  std::vector<std::vector<std::size_t>> neg_rows_by_fold;

  ScoreSet pooled() const;
};

/// Per-user cross-validated scores for every user in the feature table.
/// The master seed derives the dataset, fold and forest streams.
std::map<int, CvScores> scenario_a_cv_scores(
    const std::map<int, std::vector<ActionFeatures>>& features, int folds, std::uint64_t seed,
    const ForestOptions& options, int jobs = 1);

struct PerUserTable {
  std::vector<EvalReport> per_user;  // ascending user id
  EvalReport mean;                   // averages over users (acc..fpr fields)
  EvalReport stddev;                 // sample standard deviation over users
};

/// Action-based evaluation on the training part: per-user 10-fold CV.
/// When out_cv is given, the underlying per-user held-out scores and fold
/// assignments are copied there.
PerUserTable scenario_a_action(const std::map<int, std::vector<ActionFeatures>>& features,
                               int folds, std::uint64_t seed, const ForestOptions& options,
                               int jobs = 1, std::map<int, CvScores>* out_cv = nullptr);

/// As scenario_a_action, restricted to actions of one kind.
PerUserTable scenario_a_by_type(const std::map<int, std::vector<ActionFeatures>>& features,
                                ActionKind kind, int folds, std::uint64_t seed,
                                const ForestOptions& options, int jobs = 1,
                                std::map<int, CvScores>* out_cv = nullptr);

struct SetCurveRow {
  int k = 1;
  double auc = 0.0;
  double eer = 0.0;
};

/// Set-of-actions evaluation on the training part: held-out scores fused
/// over non-overlapping k-windows within each (user, fold) stream, pooled
/// into one global score list per k.
std::vector<SetCurveRow> scenario_a_action_set(
    const std::map<int, std::vector<ActionFeatures>>& features, int k_min, int k_max, int folds,
    std::uint64_t seed, const ForestOptions& options, int jobs = 1);

/// One labelled test session: actions scored against the claimed user's model.
struct TestSessionFeatures {
  int claimed_user = 0;
  std::string session_id;
  bool legal = true;
  std::vector<ActionFeatures> actions;
};

struct ScenarioBResult {
  PerUserTable per_user;       // filled for the Action protocol
  EvalReport global;           // pooled over all users/sessions
  RocCurve roc;                // of the pooled score lists
  std::vector<SetCurveRow> set_curve;  // filled for ActionSet: k = 1..set_size
  std::int64_t n_scores = 0;
};

/// Scenario B: train per-user forests on the training features, score the
/// test sessions. Action scores every action; ActionSet fuses floor(m/k)
/// non-overlapping windows per session (sessions with m < k are skipped);
/// Session fuses each whole session into exactly one score.
ScenarioBResult scenario_b(const std::map<int, std::vector<ActionFeatures>>& features_train,
                           const std::vector<TestSessionFeatures>& sessions_test,
                           Protocol protocol, int set_size, std::uint64_t seed,
                           const ForestOptions& options, int jobs = 1);

/// Raw-action inputs for experiments that re-sample before extraction.
struct TestSessionActions {
  int claimed_user = 0;
  std::string session_id;
  bool legal = true;
  std::vector<MouseAction> actions;
};

struct SmoothingRow {
  ResampleConfig config;
  EvalReport report;
  std::int64_t n_scores = 0;
};

/// Session-protocol scenario B once per re-sampling config, with features
/// extracted from the re-sampled actions on both sides.
std::vector<SmoothingRow> smoothing_experiment(
    const std::map<int, std::vector<MouseAction>>& train_actions,
    const std::vector<TestSessionActions>& sessions_test,
    const std::vector<ResampleConfig>& configs, std::uint64_t seed,
    const ForestOptions& options, int jobs = 1);

}  // namespace mousedyn
