#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "mousedyn/evaluation.hpp"

namespace mousedyn {

/// Feature CSV: the fixed 39-column schema header followed by user_id,
/// session_id, genuine. type_of_action is written as MM/PC/DD; numbers round-trip
/// exactly. This file is the interchange format between pipeline stages.
void write_features_csv(const std::filesystem::path& path, std::span<const ActionFeatures> rows);
std::vector<ActionFeatures> read_features_csv(const std::filesystem::path& path);

/// Groups feature rows into per-user training pools (genuine rows only).
std::map<int, std::vector<ActionFeatures>> group_by_user(std::span<const ActionFeatures> rows);

/// Groups feature rows into labelled test sessions, preserving row order.
std::vector<TestSessionFeatures> group_by_session(std::span<const ActionFeatures> rows);

/// Action summary CSV: user_id, session_id, kind, n_points, start_t, end_t.
void write_actions_csv(const std::filesystem::path& path, std::span<const MouseAction> actions);

/// Per-user results table: one row per user plus Avg and Std rows.
void write_user_table_csv(const std::filesystem::path& path, const PerUserTable& table);

/// k, AUC, EER rows.
void write_set_curve_csv(const std::filesystem::path& path, std::span<const SetCurveRow> rows);

/// ROC operating points: threshold, fpr, tpr.
void write_roc_csv(const std::filesystem::path& path, const RocCurve& roc);

/// rank, feature, gain_ratio rows.
void write_ranking_csv(const std::filesystem::path& path,
                       std::span<const std::pair<std::string, double>> ranking);

/// Cross-validation fold assignments: user, fold, dataset row, label.
void write_fold_assignments_csv(const std::filesystem::path& path,
                                const std::map<int, CvScores>& cv);

/// Provenance stamped into every report artifact.
struct ReportStamp {
  std::uint64_t seed = 0;
  std::string config_sha256;  // hash of the run configuration
};

std::string report_to_json(const EvalReport& report, const ReportStamp* stamp = nullptr);
void write_report_json(const std::filesystem::path& path, const EvalReport& report,
                       const ReportStamp* stamp = nullptr);

/// SHA-256 of every regular file under root (or of the file itself), mixed
/// with the relative paths, in sorted path order.
std::string hash_tree(const std::filesystem::path& root);

}  // namespace mousedyn
