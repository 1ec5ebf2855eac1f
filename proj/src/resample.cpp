#include "mousedyn/resample.hpp"

#include <cmath>
#include <cstddef>
#include <vector>

#include "mousedyn/errors.hpp"

namespace mousedyn {

const char* to_string(ResampleMethod m) {
  switch (m) {
    case ResampleMethod::None: return "none";
    case ResampleMethod::Linear: return "linear";
    case ResampleMethod::CubicSpline: return "spline";
  }
  return "?";
}

namespace {

std::size_t locate_interval(const std::vector<double>& ts, double t, std::size_t hint) {
  std::size_t i = hint;
  while (i + 2 < ts.size() && ts[i + 1] < t) ++i;
  return i;
}

struct LinearInterp {
  const std::vector<double>& ts;
  const std::vector<double>& ys;

  double operator()(double t, std::size_t& hint) const {
    const std::size_t i = hint = locate_interval(ts, t, hint);
    const double h = ts[i + 1] - ts[i];
    const double w = (t - ts[i]) / h;
    return ys[i] + w * (ys[i + 1] - ys[i]);
  }
};

// Natural cubic spline: second derivatives from the tridiagonal system
// (Thomas algorithm), zero at both ends.
struct SplineInterp {
  const std::vector<double>& ts;
  const std::vector<double>& ys;
  std::vector<double> m2;  // second derivatives at the knots

  SplineInterp(const std::vector<double>& t, const std::vector<double>& y) : ts(t), ys(y) {
    const std::size_t n = ts.size();
    m2.assign(n, 0.0);
    if (n < 3) return;
    std::vector<double> cp(n, 0.0), dp(n, 0.0);
    for (std::size_t i = 1; i + 1 < n; ++i) {
      const double h0 = ts[i] - ts[i - 1];
      const double h1 = ts[i + 1] - ts[i];
      const double a = h0;
      const double b = 2.0 * (h0 + h1);
      const double c = h1;
      const double d = 6.0 * ((ys[i + 1] - ys[i]) / h1 - (ys[i] - ys[i - 1]) / h0);
      const double denom = b - a * cp[i - 1];
      cp[i] = c / denom;
      dp[i] = (d - a * dp[i - 1]) / denom;
    }
    for (std::size_t i = n - 1; i-- > 1;) {
      m2[i] = dp[i] - cp[i] * m2[i + 1];
    }
  }

  double operator()(double t, std::size_t& hint) const {
    const std::size_t i = hint = locate_interval(ts, t, hint);
    const double h = ts[i + 1] - ts[i];
    const double A = (ts[i + 1] - t) / h;
    const double B = (t - ts[i]) / h;
    return A * ys[i] + B * ys[i + 1] +
           ((A * A * A - A) * m2[i] + (B * B * B - B) * m2[i + 1]) * h * h / 6.0;
  }
};

template <class Interp>
std::vector<ActionPoint> run_grid(const MouseAction& action, double hz) {
  const std::size_t n = action.points.size();
  std::vector<double> ts(n), xs(n), ys(n);
  for (std::size_t i = 0; i < n; ++i) {
    ts[i] = action.points[i].t;
    xs[i] = action.points[i].x;
    ys[i] = action.points[i].y;
  }
  Interp fx(ts, xs), fy(ts, ys);

  const double t0 = ts.front();
  const double t1 = ts.back();
  const double step = 1.0 / hz;
  const auto steps = static_cast<std::size_t>(std::floor((t1 - t0) * hz + 1e-9));

  std::vector<ActionPoint> out;
  out.reserve(steps + 2);
  std::size_t hx = 0, hy = 0;
  for (std::size_t k = 0; k <= steps; ++k) {
    const double t = t0 + static_cast<double>(k) * step;
    out.push_back({fx(t, hx), fy(t, hy), t});
  }
  // Land exactly on the original endpoint.
  if (t1 - out.back().t > 1e-9) {
    out.push_back({xs.back(), ys.back(), t1});
  } else {
    out.back() = {xs.back(), ys.back(), t1};
  }
  out.front() = {xs.front(), ys.front(), t0};
  return out;
}

}  // namespace

ResampleResult resample(const MouseAction& action, const ResampleConfig& cfg) {
  if (cfg.frequency_hz <= 0.0) throw Error("resample frequency must be positive");
  if (cfg.method == ResampleMethod::None) return {action, false};
  if (cfg.method == ResampleMethod::CubicSpline && action.points.size() < 4) {
    throw TooShortForSpline(action.points.size());
  }

  std::vector<ActionPoint> pts = cfg.method == ResampleMethod::Linear
                                     ? run_grid<LinearInterp>(action, cfg.frequency_hz)
                                     : run_grid<SplineInterp>(action, cfg.frequency_hz);
  if (pts.size() < 4) return {action, false};

  MouseAction out;
  out.kind = action.kind;
  out.user_id = action.user_id;
  out.session_id = action.session_id;
  out.points = std::move(pts);
  return {std::move(out), true};
}

}  // namespace mousedyn
