#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace mousedyn {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// ---- session ingest ----

struct MalformedLine : Error {
  MalformedLine(std::size_t line_number, const std::string& detail)
      : Error("malformed line " + std::to_string(line_number) + ": " + detail),
        line(line_number) {}
  std::size_t line;
};

struct EmptySession : Error {
  explicit EmptySession(const std::string& path)
      : Error("session contains no events: " + path) {}
};

struct AllEventsRemoved : Error {
  AllEventsRemoved() : Error("cleaning removed every event") {}
};

struct MissingLabel : Error {
  explicit MissingLabel(const std::string& filename)
      : Error("test session not present in labels file: " + filename) {}
};

struct BadLabelFile : Error {
  explicit BadLabelFile(const std::string& detail)
      : Error("bad labels file: " + detail) {}
};

// ---- features / resampling ----

struct DegenerateAction : Error {
  explicit DegenerateAction(std::size_t n)
      : Error("action has " + std::to_string(n) + " points, need at least 4") {}
};

struct TooShortForSpline : Error {
  explicit TooShortForSpline(std::size_t n)
      : Error("cubic spline needs at least 4 points, got " + std::to_string(n)) {}
};

// ---- classifier ----

struct NotEnoughUsers : Error {
  NotEnoughUsers() : Error("balanced dataset needs at least 2 users") {}
};

struct DegenerateData : Error {
  explicit DegenerateData(const std::string& detail)
      : Error("degenerate training data: " + detail) {}
};

struct SchemaMismatch : Error {
  explicit SchemaMismatch(const std::string& detail)
      : Error("feature schema mismatch: " + detail) {}
};

struct EmptySet : Error {
  EmptySet() : Error("cannot fuse an empty set of action scores") {}
};

// ---- evaluation ----

struct EmptyScoreList : Error {
  explicit EmptyScoreList(const std::string& which)
      : Error("empty " + which + " score list") {}
};

struct InsufficientData : Error {
  explicit InsufficientData(const std::string& detail)
      : Error("insufficient data: " + detail) {}
};

struct NoModelForUser : Error {
  explicit NoModelForUser(int user)
      : Error("no trained model for user " + std::to_string(user)) {}
};

struct EmptyTestSet : Error {
  EmptyTestSet() : Error("test set contains no sessions") {}
};

}  // namespace mousedyn
