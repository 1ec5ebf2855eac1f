#pragma once

// Independent reference implementations used only to cross-check the library.
// These are deliberately plain transcriptions of the segmentation and
// kinematics rules, sharing no code with the production path.

#include <cmath>
#include <cstddef>
#include <vector>

#include "mousedyn/segmentation.hpp"
#include "mousedyn/session.hpp"

namespace mousedyn::testing {

struct OracleSeries {
  std::vector<double> theta, vx, vy, v, a, j, omega, c, s, dt;
};

inline OracleSeries oracle_series(const std::vector<ActionPoint>& p) {
  const std::size_t n = p.size();
  OracleSeries o;
  o.theta.assign(n, 0.0);
  o.vx.assign(n, 0.0);
  o.vy.assign(n, 0.0);
  o.v.assign(n, 0.0);
  o.a.assign(n, 0.0);
  o.j.assign(n, 0.0);
  o.omega.assign(n, 0.0);
  o.c.assign(n, 0.0);
  o.s.assign(n, 0.0);
  o.dt.assign(n, 0.0);
  for (std::size_t i = 1; i < n; ++i) {
    const double dx = p[i].x - p[i - 1].x;
    const double dy = p[i].y - p[i - 1].y;
    o.dt[i] = p[i].t - p[i - 1].t;
    o.theta[i] = std::atan2(dy, dx);
    o.vx[i] = dx / o.dt[i];
    o.vy[i] = dy / o.dt[i];
    o.v[i] = std::sqrt(o.vx[i] * o.vx[i] + o.vy[i] * o.vy[i]);
    o.s[i] = o.s[i - 1] + std::sqrt(dx * dx + dy * dy);
  }
  for (std::size_t i = 1; i < n; ++i) o.a[i] = (o.v[i] - o.v[i - 1]) / o.dt[i];
  for (std::size_t i = 1; i < n; ++i) o.j[i] = (o.a[i] - o.a[i - 1]) / o.dt[i];
  for (std::size_t i = 1; i < n; ++i) o.omega[i] = (o.theta[i] - o.theta[i - 1]) / o.dt[i];
  for (std::size_t i = 1; i < n; ++i) {
    const double ds = o.s[i] - o.s[i - 1];
    o.c[i] = ds == 0.0 ? 0.0 : (o.theta[i] - o.theta[i - 1]) / ds;
  }
  return o;
}

struct OracleAction {
  ActionKind kind;
  std::size_t first, last;  // inclusive event range
};

/// Straight transcription of the segmentation rules:
///  - segments end at every Released event; the tail after the last Released
///    is a segment without a terminal action;
///  - Released directly after Pressed => PC over the trailing movement plus
///    the press/release pair;
///  - Released closing a left-button press whose span contains a Drag => DD
///    over exactly the press..release span, earlier movement is MM material;
///  - any other press..release span behaves like a click;
///  - a Released with no press, and everything in an unterminated tail, is
///    plain movement;
///  - movement is cut wherever dt exceeds the gap threshold (for a click
///    terminal, the cut may also fall on the movement->press boundary);
///  - every piece shorter than min_events is dropped.
inline std::vector<OracleAction> oracle_segment(const std::vector<MouseEvent>& ev,
                                                double gap, int min_events) {
  std::vector<OracleAction> out;

  auto keep = [&](ActionKind k, std::size_t first, std::size_t last) {
    if (last - first + 1 >= static_cast<std::size_t>(min_events)) {
      out.push_back({k, first, last});
    }
  };

  // Movement slice [first..last] cut at every oversized dt.
  auto movement = [&](std::size_t first, std::size_t last) {
    if (first > last) return;
    std::vector<std::size_t> cuts;  // piece start positions
    cuts.push_back(first);
    for (std::size_t i = first + 1; i <= last; ++i) {
      if (ev[i].ctime - ev[i - 1].ctime > gap) cuts.push_back(i);
    }
    for (std::size_t k = 0; k < cuts.size(); ++k) {
      const std::size_t piece_last = k + 1 < cuts.size() ? cuts[k + 1] - 1 : last;
      keep(ActionKind::MM, cuts[k], piece_last);
    }
  };

  // Click-terminated segment: movement may be cut anywhere up to the press;
  // the final piece plus press..release is the PC.
  auto click_terminated = [&](std::size_t seg_first, std::size_t press, std::size_t release) {
    std::size_t pc_first = seg_first;
    for (std::size_t i = seg_first + 1; i <= press; ++i) {
      if (ev[i].ctime - ev[i - 1].ctime > gap) pc_first = i;
    }
    if (pc_first > seg_first) movement(seg_first, pc_first - 1);
    keep(ActionKind::PC, pc_first, release);
  };

  // Segment boundaries.
  std::vector<std::pair<std::size_t, std::size_t>> segments;
  std::size_t start = 0;
  for (std::size_t i = 0; i < ev.size(); ++i) {
    if (ev[i].state == State::Released) {
      segments.push_back({start, i});
      start = i + 1;
    }
  }
  const bool has_tail = start < ev.size();

  for (auto [first, last] : segments) {
    std::size_t press = 0;
    bool found = false;
    for (std::size_t i = last; i > first; --i) {
      if (ev[i - 1].state == State::Pressed) {
        press = i - 1;
        found = true;
        break;
      }
    }
    if (!found) {
      movement(first, last);
      continue;
    }
    bool drag = false;
    for (std::size_t i = press + 1; i < last; ++i) {
      if (ev[i].state == State::Drag) drag = true;
    }
    if (press + 1 == last || !drag || ev[press].button != Button::Left) {
      click_terminated(first, press, last);
    } else {
      if (press > first) movement(first, press - 1);
      keep(ActionKind::DD, press, last);
    }
  }
  if (has_tail) movement(start, ev.size() - 1);
  return out;
}

}  // namespace mousedyn::testing
