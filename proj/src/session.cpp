#include "mousedyn/session.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <mutex>
#include <optional>
#include <string_view>
#include <unordered_map>

#include "mousedyn/errors.hpp"
#include "mousedyn/parallel.hpp"

namespace mousedyn {

const char* to_string(Button b) {
  switch (b) {
    case Button::None: return "NoButton";
    case Button::Left: return "Left";
    case Button::Right: return "Right";
    case Button::Middle: return "Middle";
    case Button::Scroll: return "Scroll";
  }
  return "?";
}

const char* to_string(State s) {
  switch (s) {
    case State::Move: return "Move";
    case State::Pressed: return "Pressed";
    case State::Released: return "Released";
    case State::Drag: return "Drag";
    case State::Down: return "Down";
    case State::Up: return "Up";
  }
  return "?";
}

namespace {

std::optional<Button> parse_button(std::string_view tok) {
  if (tok == "NoButton") return Button::None;
  if (tok == "Left") return Button::Left;
  if (tok == "Right") return Button::Right;
  if (tok == "Middle") return Button::Middle;
  // Scroll variants ("Scroll", "ScrollUp", ...) fold to Scroll.
  if (tok.substr(0, 6) == "Scroll") return Button::Scroll;
  return std::nullopt;
}

std::optional<State> parse_state(std::string_view tok) {
  if (tok == "Move") return State::Move;
  if (tok == "Pressed") return State::Pressed;
  if (tok == "Released") return State::Released;
  if (tok == "Drag") return State::Drag;
  if (tok == "Down") return State::Down;
  if (tok == "Up") return State::Up;
  return std::nullopt;
}

bool parse_double(std::string_view tok, double& out) {
  const char* first = tok.data();
  const char* last = tok.data() + tok.size();
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && ptr == last;
}

bool parse_pixel(std::string_view tok, int& out) {
  const char* first = tok.data();
  const char* last = tok.data() + tok.size();
  long v = 0;
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last || v < 0 || v > INT32_MAX) return false;
  out = static_cast<int>(v);
  return true;
}

// Splits a line into exactly 6 comma-separated fields. Returns false on any
// other field count.
bool split6(std::string_view line, std::string_view out[6]) {
  std::size_t n = 0;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= line.size(); ++i) {
    if (i == line.size() || line[i] == ',') {
      if (n == 6) return false;
      out[n++] = line.substr(start, i - start);
      start = i + 1;
    }
  }
  return n == 6;
}

std::string session_id_from_filename(const std::string& filename) {
  constexpr std::string_view prefix = "session_";
  if (filename.size() > prefix.size() &&
      std::string_view(filename).substr(0, prefix.size()) == prefix) {
    return filename.substr(prefix.size());
  }
  return filename;
}

}  // namespace

Session parse_session(const std::filesystem::path& path, int user_id,
                      const IngestConfig& cfg) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open session file: " + path.string());

  Session s;
  s.user_id = user_id;
  s.session_id = session_id_from_filename(path.filename().string());

  std::string line;
  std::size_t line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;

    std::string_view fields[6];
    if (!split6(line, fields)) {
      throw MalformedLine(line_number, "expected 6 comma-separated fields");
    }

    MouseEvent e;
    if (!parse_double(fields[0], e.rtime)) {
      // A header line may be present as the first line and is skipped.
      if (line_number == 1) continue;
      throw MalformedLine(line_number, "unparseable rtime '" + std::string(fields[0]) + "'");
    }
    if (!parse_double(fields[1], e.ctime)) {
      throw MalformedLine(line_number, "unparseable ctime '" + std::string(fields[1]) + "'");
    }

    auto button = parse_button(fields[2]);
    auto state = parse_state(fields[3]);
    if (!button || !state) {
      if (cfg.strict_tokens) {
        throw MalformedLine(line_number, "unknown token '" +
                                             std::string(!button ? fields[2] : fields[3]) + "'");
      }
      if (!button) button = Button::None;
      if (!state) state = State::Move;
    }
    e.button = *button;
    e.state = *state;

    if (!parse_pixel(fields[4], e.x)) {
      throw MalformedLine(line_number, "unparseable x '" + std::string(fields[4]) + "'");
    }
    if (!parse_pixel(fields[5], e.y)) {
      throw MalformedLine(line_number, "unparseable y '" + std::string(fields[5]) + "'");
    }
    s.events.push_back(e);
  }

  if (s.events.empty()) throw EmptySession(path.string());
  return s;
}

std::vector<MouseEvent> clean_events(std::vector<MouseEvent> events,
                                     const IngestConfig& cfg) {
  // 1. Collapse consecutive duplicates (first kept).
  std::vector<MouseEvent> out;
  out.reserve(events.size());
  for (const MouseEvent& e : events) {
    if (!out.empty()) {
      const MouseEvent& p = out.back();
      const bool same = p.button == e.button && p.state == e.state &&
                        p.x == e.x && p.y == e.y &&
                        (!cfg.dedup_exact || p.ctime == e.ctime);
      if (same) continue;
    }
    out.push_back(e);
  }

  // 2. Replace out-of-bounds coordinates with the last in-bounds pair seen.
  //    Events before the first in-bounds pair are dropped.
  {
    std::vector<MouseEvent> repl;
    repl.reserve(out.size());
    int last_x = -1, last_y = -1;
    for (MouseEvent e : out) {
      if (e.x > cfg.max_x || e.y > cfg.max_y) {
        if (last_x < 0) continue;
        e.x = last_x;
        e.y = last_y;
      } else {
        last_x = e.x;
        last_y = e.y;
      }
      repl.push_back(e);
    }
    out = std::move(repl);
  }

  // 3. Drop scroll events entirely.
  std::erase_if(out, [](const MouseEvent& e) { return e.button == Button::Scroll; });

  // 4. Of consecutive events sharing a ctime, keep only the last.
  {
    std::vector<MouseEvent> uniq;
    uniq.reserve(out.size());
    for (const MouseEvent& e : out) {
      if (!uniq.empty() && uniq.back().ctime == e.ctime) {
        uniq.back() = e;
      } else {
        uniq.push_back(e);
      }
    }
    out = std::move(uniq);
  }

  if (out.empty()) throw AllEventsRemoved();
  return out;
}

void write_session_file(const std::filesystem::path& path, const Session& s) {
  std::ofstream outf(path, std::ios::binary);
  if (!outf) throw Error("cannot write session file: " + path.string());
  outf << "record timestamp,client timestamp,button,state,x,y\n";
  char buf[128];
  for (const MouseEvent& e : s.events) {
    std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%s,%s,%d,%d\n", e.rtime, e.ctime,
                  to_string(e.button), to_string(e.state), e.x, e.y);
    outf << buf;
  }
}

std::vector<LabelEntry> parse_labels_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw BadLabelFile("cannot open " + path.string());

  std::vector<LabelEntry> entries;
  std::string line;
  std::size_t line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line_number == 1) continue;  // header
    auto comma = line.find(',');
    if (comma == std::string::npos || comma == 0) {
      throw BadLabelFile("line " + std::to_string(line_number) + " lacks filename,is_illegal");
    }
    std::string flag = line.substr(comma + 1);
    if (flag != "0" && flag != "1") {
      throw BadLabelFile("line " + std::to_string(line_number) + ": is_illegal must be 0 or 1, got '" + flag + "'");
    }
    entries.push_back({line.substr(0, comma), flag == "1"});
  }
  return entries;
}

namespace {

struct SessionFile {
  std::filesystem::path path;
  int user_id = 0;
  bool is_test = false;
};

int parse_user_dir(const std::string& name) {
  constexpr std::string_view prefix = "user";
  if (name.size() <= prefix.size() ||
      std::string_view(name).substr(0, prefix.size()) != prefix) {
    return -1;
  }
  int id = 0;
  auto digits = std::string_view(name).substr(prefix.size());
  auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), id);
  if (ec != std::errc() || ptr != digits.data() + digits.size()) return -1;
  return id;
}

std::filesystem::path find_subtree(const std::filesystem::path& root,
                                   std::initializer_list<const char*> names) {
  for (const char* n : names) {
    auto p = root / n;
    if (std::filesystem::is_directory(p)) return p;
  }
  return {};
}

std::vector<SessionFile> list_session_files(const std::filesystem::path& root) {
  std::vector<SessionFile> files;
  auto scan = [&files](const std::filesystem::path& subtree, bool is_test) {
    if (subtree.empty()) return;
    for (const auto& user_dir : std::filesystem::directory_iterator(subtree)) {
      if (!user_dir.is_directory()) continue;
      int uid = parse_user_dir(user_dir.path().filename().string());
      if (uid < 0) continue;
      for (const auto& f : std::filesystem::directory_iterator(user_dir.path())) {
        if (!f.is_regular_file()) continue;
        files.push_back({f.path(), uid, is_test});
      }
    }
  };
  scan(find_subtree(root, {"training_files", "training"}), false);
  scan(find_subtree(root, {"test_files", "test"}), true);
  std::sort(files.begin(), files.end(), [](const SessionFile& a, const SessionFile& b) {
    if (a.user_id != b.user_id) return a.user_id < b.user_id;
    return a.path.filename().string() < b.path.filename().string();
  });
  return files;
}

}  // namespace

void for_each_session(const std::filesystem::path& root,
                      const std::filesystem::path& labels,
                      const IngestConfig& cfg, int jobs,
                      const std::function<void(Session&&)>& fn) {
  std::vector<SessionFile> files = list_session_files(root);
  if (files.empty()) return;

  std::unordered_map<std::string, bool> label_map;
  const bool have_test = std::any_of(files.begin(), files.end(),
                                     [](const SessionFile& f) { return f.is_test; });
  if (have_test) {
    if (labels.empty()) throw BadLabelFile("labels file required for test sessions");
    for (const LabelEntry& e : parse_labels_file(labels)) {
      label_map[e.filename] = e.is_illegal;
    }
  }

  std::vector<Session> parsed(files.size());
  std::exception_ptr first_error;
  std::mutex error_mutex;
  parallel_for(files.size(), jobs, [&](std::size_t i) {
    try {
      Session s = parse_session(files[i].path, files[i].user_id, cfg);
      s.events = clean_events(std::move(s.events), cfg);
      if (files[i].is_test) {
        const std::string filename = files[i].path.filename().string();
        auto it = label_map.find(filename);
        if (it == label_map.end()) throw MissingLabel(filename);
        s.role = it->second ? SessionRole::TestNegative : SessionRole::TestPositive;
      } else {
        s.role = SessionRole::Training;
      }
      parsed[i] = std::move(s);
    } catch (...) {
      std::lock_guard<std::mutex> lock(error_mutex);
      if (!first_error) first_error = std::current_exception();
    }
  });
  if (first_error) std::rethrow_exception(first_error);

  for (Session& s : parsed) fn(std::move(s));
}

std::vector<Session> load_corpus(const std::filesystem::path& root,
                                 const std::filesystem::path& labels,
                                 const IngestConfig& cfg, int jobs) {
  std::vector<Session> sessions;
  for_each_session(root, labels, cfg, jobs,
                   [&sessions](Session&& s) { sessions.push_back(std::move(s)); });
  return sessions;
}

}  // namespace mousedyn
