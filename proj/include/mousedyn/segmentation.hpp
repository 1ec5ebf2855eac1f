#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mousedyn/session.hpp"

namespace mousedyn {

enum class ActionKind { MM, PC, DD };

const char* to_string(ActionKind k);

struct ActionPoint {
  double x = 0.0;
  double y = 0.0;
  double t = 0.0;

  friend bool operator==(const ActionPoint&, const ActionPoint&) = default;
};

/// A typed run of consecutive mouse events, reduced to its (x, y, t) points.
/// Invariants: at least 4 points, t strictly increasing; a DD begins at a
/// left-button press and ends at the matching release.
struct MouseAction {
  ActionKind kind = ActionKind::MM;
  std::vector<ActionPoint> points;
  int user_id = 0;
  std::string session_id;

  double elapsed() const { return points.back().t - points.front().t; }
};

struct SegmentConfig {
  double gap_threshold = 10.0;  // seconds
  int min_events = 4;
};

/// Splits a cleaned event stream into MM/PC/DD actions.
///
/// Pass 1 cuts the stream into segments ending at each Released event; the
/// stretch after the final Released (if any) forms a trailing segment with no
/// terminal button action. Pass 2 classifies each segment's terminal action
/// and gap-splits the remaining movement into MM actions:
///   - Released immediately preceded by Pressed: the trailing movement plus
///     the press/release pair form a PC action.
///   - Released closing a left-button press that produced drag events: the
///     press..release span forms a DD action; movement before the press is
///     MM material. Time gaps inside the span do not split it.
///   - a press/release span without drags behaves like a click (PC).
///   - Released with no preceding press, and any dangling press at stream
///     end, are treated as plain movement.
/// Actions with fewer than cfg.min_events events are discarded.
std::vector<MouseAction> segment(const Session& session, const SegmentConfig& cfg = {});

struct ActionTypeCounts {
  std::int64_t mm = 0;
  std::int64_t pc = 0;
  std::int64_t dd = 0;

  std::int64_t total() const { return mm + pc + dd; }
  double share(std::int64_t k) const { return total() ? static_cast<double>(k) / static_cast<double>(total()) : 0.0; }
};

ActionTypeCounts action_type_histogram(const std::vector<MouseAction>& actions);

}  // namespace mousedyn
