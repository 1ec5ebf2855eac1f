#include "mousedyn/segmentation.hpp"

#include <cstddef>

#include "mousedyn/errors.hpp"

namespace mousedyn {

const char* to_string(ActionKind k) {
  switch (k) {
    case ActionKind::MM: return "MM";
    case ActionKind::PC: return "PC";
    case ActionKind::DD: return "DD";
  }
  return "?";
}

namespace {

struct Builder {
  const Session& session;
  const SegmentConfig& cfg;
  std::vector<MouseAction> out;

  void emit(ActionKind kind, std::size_t first, std::size_t last) {
    const std::size_t n = last - first + 1;
    if (n < static_cast<std::size_t>(cfg.min_events)) return;
    MouseAction a;
    a.kind = kind;
    a.user_id = session.user_id;
    a.session_id = session.session_id;
    a.points.reserve(n);
    for (std::size_t i = first; i <= last; ++i) {
      const MouseEvent& e = session.events[i];
      if (!a.points.empty() && e.ctime <= a.points.back().t) {
        throw Error("segment: non-increasing ctime, session not cleaned");
      }
      a.points.push_back({static_cast<double>(e.x), static_cast<double>(e.y), e.ctime});
    }
    out.push_back(std::move(a));
  }

  // Gap-splits events[first..last] into MM actions.
  void emit_movement(std::size_t first, std::size_t last) {
    if (first > last) return;
    std::size_t run_start = first;
    for (std::size_t i = first + 1; i <= last; ++i) {
      if (session.events[i].ctime - session.events[i - 1].ctime > cfg.gap_threshold) {
        emit(ActionKind::MM, run_start, i - 1);
        run_start = i;
      }
    }
    emit(ActionKind::MM, run_start, last);
  }

  // Emits the terminal action of a segment whose press is at p and release at
  // r, attaching the trailing movement run (events after the last gap before
  // p). Movement split off by gaps becomes MM actions.
  void emit_click_terminated(std::size_t seg_start, std::size_t p, std::size_t r) {
    std::size_t term_start = seg_start;
    // Gaps are checked up to and including the movement -> press boundary;
    // never inside the press..release span.
    for (std::size_t i = seg_start + 1; i <= p; ++i) {
      if (session.events[i].ctime - session.events[i - 1].ctime > cfg.gap_threshold) {
        emit_movement(term_start, i - 1);
        term_start = i;
      }
    }
    emit(ActionKind::PC, term_start, r);
  }

  void handle_segment(std::size_t seg_start, std::size_t seg_end, bool released) {
    if (!released) {
      emit_movement(seg_start, seg_end);
      return;
    }
    const std::size_t r = seg_end;

    // Last press before the release, if any.
    std::size_t p = r;
    bool have_press = false;
    for (std::size_t i = r; i > seg_start; --i) {
      if (session.events[i - 1].state == State::Pressed) {
        p = i - 1;
        have_press = true;
        break;
      }
    }

    if (!have_press) {
      // Dangling release: the whole segment is movement.
      emit_movement(seg_start, seg_end);
      return;
    }

    if (p + 1 == r) {
      emit_click_terminated(seg_start, p, r);
      return;
    }

    bool has_drag = false;
    for (std::size_t i = p + 1; i < r; ++i) {
      if (session.events[i].state == State::Drag) {
        has_drag = true;
        break;
      }
    }

    if (has_drag && session.events[p].button == Button::Left) {
      // Movement before the press is MM material; the press..release span is
      // the drag-and-drop.
      if (p > seg_start) emit_movement(seg_start, p - 1);
      emit(ActionKind::DD, p, r);
    } else {
      // Press held without drags (or a non-left drag): treat as a click.
      emit_click_terminated(seg_start, p, r);
    }
  }
};

}  // namespace

std::vector<MouseAction> segment(const Session& session, const SegmentConfig& cfg) {
  Builder b{session, cfg, {}};
  std::size_t seg_start = 0;
  for (std::size_t i = 0; i < session.events.size(); ++i) {
    if (session.events[i].state == State::Released) {
      b.handle_segment(seg_start, i, true);
      seg_start = i + 1;
    }
  }
  if (seg_start < session.events.size()) {
    b.handle_segment(seg_start, session.events.size() - 1, false);
  }
  return std::move(b.out);
}

ActionTypeCounts action_type_histogram(const std::vector<MouseAction>& actions) {
  ActionTypeCounts c;
  for (const MouseAction& a : actions) {
    switch (a.kind) {
      case ActionKind::MM: ++c.mm; break;
      case ActionKind::PC: ++c.pc; break;
      case ActionKind::DD: ++c.dd; break;
    }
  }
  return c;
}

}  // namespace mousedyn
