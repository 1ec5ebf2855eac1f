#pragma once

#include <filesystem>
#include <functional>
#include <string>
#include <vector>

namespace mousedyn {

enum class Button { None, Left, Right, Middle, Scroll };
enum class State { Move, Pressed, Released, Drag, Down, Up };

const char* to_string(Button b);
const char* to_string(State s);

/// One raw log line: (rtime, ctime, button, state, x, y).
/// ctime (client clock) is the timestamp used downstream; rtime is retained
/// but unused.
struct MouseEvent {
  double rtime = 0.0;
  double ctime = 0.0;
  Button button = Button::None;
  State state = State::Move;
  int x = 0;
  int y = 0;

  friend bool operator==(const MouseEvent&, const MouseEvent&) = default;
};

enum class SessionRole { Training, TestPositive, TestNegative };

struct Session {
  int user_id = 0;
  std::string session_id;  // file name without the "session_" prefix
  SessionRole role = SessionRole::Training;
  std::vector<MouseEvent> events;
};

struct IngestConfig {
  // Coordinates above these bounds are treated as "moved outside the remote
  // desktop window" and replaced by the nearest preceding in-bounds pair.
  int max_x = 4096;
  int max_y = 4096;
  // strict: unknown button/state tokens raise MalformedLine.
  // lenient: they map to None/Move.
  bool strict_tokens = true;
  // true: consecutive duplicates compare (ctime, button, state, x, y).
  // false: ctime is ignored in the comparison.
  bool dedup_exact = true;
};

/// Parses one session file. A single header line is skipped when present.
/// Does not clean; callers normally follow up with clean_events().
Session parse_session(const std::filesystem::path& path, int user_id,
                      const IngestConfig& cfg = {});

/// Applies the cleaning rules in order:
///   1. collapse consecutive duplicate events,
///   2. replace out-of-bounds coordinates with the nearest preceding
///      in-bounds pair (events before any in-bounds pair are dropped),
///   3. drop all scroll-button events,
///   4. of consecutive events sharing a ctime, keep only the last
///      (guarantees dt > 0 for every adjacent pair downstream).
std::vector<MouseEvent> clean_events(std::vector<MouseEvent> events,
                                     const IngestConfig& cfg = {});

/// Writes a session back in the input file format (with header line).
void write_session_file(const std::filesystem::path& path, const Session& s);

/// Test-session labels: file name -> is_illegal.
struct LabelEntry {
  std::string filename;
  bool is_illegal = false;
};
std::vector<LabelEntry> parse_labels_file(const std::filesystem::path& path);

/// Loads, cleans and role-assigns every session under root. The root must
/// contain training and test subtrees of per-user directories. Returns
/// sessions ordered by (user_id, session_id). An empty or missing root
/// yields an empty list.
std::vector<Session> load_corpus(const std::filesystem::path& root,
                                 const std::filesystem::path& labels,
                                 const IngestConfig& cfg = {}, int jobs = 1);

/// Streaming variant of load_corpus: sessions are parsed and cleaned in
/// parallel but fn is invoked in (user_id, session_id) order, one session at
/// a time, so callers can drop event data as they go.
void for_each_session(const std::filesystem::path& root,
                      const std::filesystem::path& labels,
                      const IngestConfig& cfg, int jobs,
                      const std::function<void(Session&&)>& fn);

}  // namespace mousedyn
