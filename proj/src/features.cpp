#include "mousedyn/features.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "mousedyn/errors.hpp"

namespace mousedyn {

KinematicSeries compute_series(const MouseAction& action) {
  const std::size_t n = action.points.size();
  if (n < 4) throw DegenerateAction(n);

  KinematicSeries ks;
  for (auto* v : {&ks.theta, &ks.vx, &ks.vy, &ks.v, &ks.a, &ks.j, &ks.omega, &ks.c, &ks.s, &ks.dt}) {
    v->assign(n, 0.0);
  }

  const auto& p = action.points;
  for (std::size_t i = 1; i < n; ++i) {
    const double dx = p[i].x - p[i - 1].x;
    const double dy = p[i].y - p[i - 1].y;
    const double dt = p[i].t - p[i - 1].t;
    ks.dt[i] = dt;
    ks.theta[i] = std::atan2(dy, dx);
    ks.vx[i] = dx / dt;
    ks.vy[i] = dy / dt;
    ks.v[i] = std::sqrt(ks.vx[i] * ks.vx[i] + ks.vy[i] * ks.vy[i]);
    ks.omega[i] = (ks.theta[i] - ks.theta[i - 1]) / dt;
    ks.s[i] = ks.s[i - 1] + std::sqrt(dx * dx + dy * dy);
    const double ds = ks.s[i] - ks.s[i - 1];
    ks.c[i] = ds != 0.0 ? (ks.theta[i] - ks.theta[i - 1]) / ds : 0.0;
  }
  for (std::size_t i = 1; i < n; ++i) ks.a[i] = (ks.v[i] - ks.v[i - 1]) / ks.dt[i];
  for (std::size_t i = 1; i < n; ++i) ks.j[i] = (ks.a[i] - ks.a[i - 1]) / ks.dt[i];
  return ks;
}

const std::array<std::string, kFeatureCount>& feature_names() {
  static const std::array<std::string, kFeatureCount> names = {
      "mean_vx", "sd_vx", "min_vx", "max_vx",
      "mean_vy", "sd_vy", "min_vy", "max_vy",
      "mean_v", "sd_v", "min_v", "max_v",
      "mean_a", "sd_a", "min_a", "max_a",
      "mean_jerk", "sd_jerk", "min_jerk", "max_jerk",
      "mean_omega", "sd_omega", "min_omega", "max_omega",
      "mean_curv", "sd_curv", "min_curv", "max_curv",
      "type_of_action",
      "elapsed_time",
      "travelled_distance_pixel",
      "dist_end_to_end_line",
      "direction_of_movement",
      "straightness",
      "num_points",
      "sum_of_angles",
      "largest_deviation",
      "num_critical_points",
      "a_beg_time",
  };
  return names;
}

bool feature_is_categorical(int index) {
  return index == kTypeOfAction || index == kDirection;
}

int feature_cardinality(int index) {
  if (index == kTypeOfAction) return 3;  // MM, PC, DD
  if (index == kDirection) return 9;     // codes 1..8
  return 0;
}

int quantize_direction(double x_start, double y_start, double x_end, double y_end) {
  double deg = std::atan2(y_end - y_start, x_end - x_start) * 180.0 / std::numbers::pi;
  if (deg < 0.0) deg += 360.0;
  int code = static_cast<int>(deg / 45.0) + 1;
  return std::min(code, 8);  // deg == 360 cannot occur, guard rounding anyway
}

namespace {

struct Stats {
  double mean = 0.0, sd = 0.0, min = 0.0, max = 0.0;
};

// Population statistics over series[first..]; sd is 0 for a single value.
Stats window_stats(const std::vector<double>& series, std::size_t first) {
  Stats st;
  const std::size_t n = series.size() - first;
  if (n == 0) return st;
  double sum = 0.0;
  st.min = st.max = series[first];
  for (std::size_t i = first; i < series.size(); ++i) {
    sum += series[i];
    st.min = std::min(st.min, series[i]);
    st.max = std::max(st.max, series[i]);
  }
  st.mean = sum / static_cast<double>(n);
  double ss = 0.0;
  for (std::size_t i = first; i < series.size(); ++i) {
    const double d = series[i] - st.mean;
    ss += d * d;
  }
  st.sd = std::sqrt(ss / static_cast<double>(n));
  return st;
}

void put_stats(ActionFeatures& f, int base, const Stats& st) {
  f.values[base + 0] = st.mean;
  f.values[base + 1] = st.sd;
  f.values[base + 2] = st.min;
  f.values[base + 3] = st.max;
}

double point_to_chord_distance(const ActionPoint& pt, const ActionPoint& a, const ActionPoint& b) {
  const double dx = b.x - a.x;
  const double dy = b.y - a.y;
  const double len = std::sqrt(dx * dx + dy * dy);
  if (len == 0.0) {
    const double ex = pt.x - a.x;
    const double ey = pt.y - a.y;
    return std::sqrt(ex * ex + ey * ey);
  }
  return std::abs(dx * (a.y - pt.y) - (a.x - pt.x) * dy) / len;
}

}  // namespace

ActionFeatures extract_features(const MouseAction& action, double sharp_threshold) {
  const KinematicSeries ks = compute_series(action);
  const std::size_t n = action.points.size();
  const auto& p = action.points;

  ActionFeatures f;
  f.user_id = action.user_id;
  f.session_id = action.session_id;

  put_stats(f, kMeanVx, window_stats(ks.vx, 1));
  put_stats(f, kMeanVy, window_stats(ks.vy, 1));
  put_stats(f, kMeanV, window_stats(ks.v, 1));
  put_stats(f, kMeanA, window_stats(ks.a, 2));
  put_stats(f, kMeanJerk, window_stats(ks.j, 3));
  put_stats(f, kMeanOmega, window_stats(ks.omega, 1));
  put_stats(f, kMeanCurv, window_stats(ks.c, 1));

  f.values[kTypeOfAction] = static_cast<double>(static_cast<int>(action.kind));
  f.values[kElapsedTime] = p.back().t - p.front().t;
  f.values[kTravelledDistance] = ks.s.back();

  const double ex = p.back().x - p.front().x;
  const double ey = p.back().y - p.front().y;
  const double end_to_end = std::sqrt(ex * ex + ey * ey);
  f.values[kDistEndToEnd] = end_to_end;
  f.values[kDirection] =
      static_cast<double>(quantize_direction(p.front().x, p.front().y, p.back().x, p.back().y));
  f.values[kStraightness] =
      ks.s.back() > 0.0 ? std::clamp(end_to_end / ks.s.back(), 0.0, 1.0) : 0.0;
  f.values[kNumPoints] = static_cast<double>(n);

  double sum_angles = 0.0;
  for (double th : ks.theta) sum_angles += th;
  f.values[kSumOfAngles] = sum_angles;

  double largest = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    largest = std::max(largest, point_to_chord_distance(p[i], p.front(), p.back()));
  }
  f.values[kLargestDeviation] = largest;

  // Padding theta[0] = 0 would always count as sharp; skip it.
  int sharp = 0;
  for (std::size_t i = 1; i < n; ++i) {
    if (std::abs(ks.theta[i]) < sharp_threshold) ++sharp;
  }
  f.values[kNumCriticalPoints] = static_cast<double>(sharp);

  // Duration of the initial accelerating run: sum dt until the first
  // genuinely computed acceleration <= 0 (a[0] and a[1] involve padding).
  {
    double a_beg = f.values[kElapsedTime];
    for (std::size_t i = 2; i < n; ++i) {
      if (ks.a[i] <= 0.0) {
        double acc = 0.0;
        for (std::size_t k = 1; k < i; ++k) acc += ks.dt[k];
        a_beg = acc;
        break;
      }
    }
    f.values[kABegTime] = a_beg;
  }

  return f;
}

}  // namespace mousedyn
