#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "mousedyn/segmentation.hpp"

namespace mousedyn {

/// The seven per-action time series plus the path-length and dt helpers.
/// All vectors have length n with a padding element at index 0 (theta, vx,
/// vy, v, a, j, omega, c and dt are 0 there; s[0] = 0 by definition).
/// Genuinely computed entries start at index 1 for theta/vx/vy/v/omega/c,
/// index 2 for a and index 3 for j (earlier entries involve the padding).
struct KinematicSeries {
  std::vector<double> theta;  // path tangent angle, (-pi, pi]
  std::vector<double> vx, vy, v;
  std::vector<double> a, j, omega;
  std::vector<double> c;  // curvature: angle change per travelled distance
  std::vector<double> s;  // cumulative path length
  std::vector<double> dt;

  std::size_t n() const { return theta.size(); }
};

KinematicSeries compute_series(const MouseAction& action);

inline constexpr int kFeatureCount = 39;

// Indices into ActionFeatures::values. Order is the fixed schema order of
// the feature CSV and of trained models.
enum FeatureIndex : int {
  kMeanVx = 0, kSdVx, kMinVx, kMaxVx,
  kMeanVy, kSdVy, kMinVy, kMaxVy,
  kMeanV, kSdV, kMinV, kMaxV,
  kMeanA, kSdA, kMinA, kMaxA,
  kMeanJerk, kSdJerk, kMinJerk, kMaxJerk,
  kMeanOmega, kSdOmega, kMinOmega, kMaxOmega,
  kMeanCurv, kSdCurv, kMinCurv, kMaxCurv,
  kTypeOfAction,
  kElapsedTime,
  kTravelledDistance,
  kDistEndToEnd,
  kDirection,
  kStraightness,
  kNumPoints,
  kSumOfAngles,
  kLargestDeviation,
  kNumCriticalPoints,
  kABegTime,
};

const std::array<std::string, kFeatureCount>& feature_names();
bool feature_is_categorical(int index);
// Largest category code + 1 for categorical features, 0 for numeric ones.
int feature_cardinality(int index);

/// One row of the 39-feature schema plus provenance metadata.
struct ActionFeatures {
  std::array<double, kFeatureCount> values{};
  int user_id = 0;
  std::string session_id;
  bool genuine = true;

  ActionKind kind() const { return static_cast<ActionKind>(static_cast<int>(values[kTypeOfAction])); }
};

/// Computes all 39 features of one action. Statistics are taken over the
/// genuinely computed part of each series (padding excluded); see
/// KinematicSeries for the windows.
ActionFeatures extract_features(const MouseAction& action, double sharp_threshold = 0.0005);

/// Eight-sector direction code of the end-to-end line: atan2 angle
/// normalized to [0, 360) degrees, code = floor(angle/45) + 1.
int quantize_direction(double x_start, double y_start, double x_end, double y_end);

}  // namespace mousedyn
