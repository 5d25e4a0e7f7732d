#pragma once

#include <compare>
#include <stdexcept>
#include <string>
#include <utility>

namespace flare {

/// 1-based line/column position inside a source file.
struct SourcePos {
  int line = 1;
  int col = 1;

  friend auto operator<=>(const SourcePos&, const SourcePos&) = default;
};

/// Inclusive start, inclusive end (end points at the last character).
struct SourceSpan {
  std::string file;
  int start_line = 1;
  int start_col = 1;
  int end_line = 1;
  int end_col = 1;

  SourcePos start() const { return {start_line, start_col}; }
  SourcePos end() const { return {end_line, end_col}; }

  bool contains(SourcePos p) const { return start() <= p && p <= end(); }
  bool contains(const SourceSpan& other) const {
    return start() <= other.start() && other.end() <= end();
  }

  friend bool operator==(const SourceSpan&, const SourceSpan&) = default;
};

inline SourceSpan merge(const SourceSpan& a, const SourceSpan& b) {
  SourceSpan s = a;
  s.end_line = b.end_line;
  s.end_col = b.end_col;
  return s;
}

inline std::string to_string(const SourceSpan& s) {
  return s.file + ":" + std::to_string(s.start_line) + ":" + std::to_string(s.start_col);
}

// Error hierarchy. Every user-facing failure carries the span it blames.

class Error : public std::runtime_error {
 public:
  Error(SourceSpan span, const std::string& message)
      : std::runtime_error(message), span_(std::move(span)) {}

  const SourceSpan& span() const { return span_; }
  virtual const char* category() const { return "error"; }

 private:
  SourceSpan span_;
};

class LexError : public Error {
 public:
  using Error::Error;
  const char* category() const override { return "lex error"; }
};

class ParseError : public Error {
 public:
  ParseError(SourceSpan span, std::string expected, const std::string& found)
      : Error(std::move(span), "expected " + expected + ", found " + found),
        expected_(std::move(expected)) {}
  const std::string& expected() const { return expected_; }
  const char* category() const override { return "parse error"; }

 private:
  std::string expected_;
};

class ResolveError : public Error {
 public:
  using Error::Error;
  const char* category() const override { return "resolve error"; }
};

class CompositionError : public Error {
 public:
  using Error::Error;
  const char* category() const override { return "composition error"; }
};

/// Raised when an internal analysis invariant is breached (a bug, not bad input).
class InvariantError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// `file:line:col: severity: message`
inline std::string format_diagnostic(const SourceSpan& span, const std::string& severity,
                                     const std::string& message) {
  return to_string(span) + ": " + severity + ": " + message;
}

}  // namespace flare
