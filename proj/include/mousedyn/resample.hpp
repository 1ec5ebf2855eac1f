#pragma once

#include "mousedyn/segmentation.hpp"

namespace mousedyn {

enum class ResampleMethod { None, Linear, CubicSpline };

const char* to_string(ResampleMethod m);

struct ResampleConfig {
  double frequency_hz = 20.0;
  ResampleMethod method = ResampleMethod::None;
};

struct ResampleResult {
  MouseAction action;
  bool resampled = false;  // false when method is None or the grid was too short
};

/// Re-samples an action's (x, y, t) onto a uniform time grid at
/// cfg.frequency_hz, interpolating x(t) and y(t) independently. The grid runs
/// from t_1 in steps of 1/f; the original final point is appended when the
/// grid does not land on it, so both endpoints are always preserved. If the
/// re-sampled action would have fewer than 4 points the input is returned
/// unchanged with resampled = false.
ResampleResult resample(const MouseAction& action, const ResampleConfig& cfg);

}  // namespace mousedyn
