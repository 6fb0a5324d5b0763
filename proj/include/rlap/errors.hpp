#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace rlap {

// Bad model / option values. Library preconditions use std::invalid_argument;
// this one is raised for user-supplied configuration.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed text input. line() is 1-based, 0 when not tied to a line.
class ParseError : public IoError {
 public:
  ParseError(const std::string& what, std::size_t line)
      : IoError(line ? what + " (line " + std::to_string(line) + ")" : what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class BoundsError : public ParseError {
 public:
  using ParseError::ParseError;
};

class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// The p-th smallest Bethe-Hessian eigenvalue never crosses zero on the search
// bracket: p exceeds the number of detectable communities.
class BeyondDetectableRank : public std::runtime_error {
 public:
  BeyondDetectableRank(int p, double value_at_upper)
      : std::runtime_error("beyond detectable rank: s_" + std::to_string(p) +
                           "(H_r) > 0 at the upper bracket edge"),
        p_(p),
        value_at_upper_(value_at_upper) {}
  int p() const noexcept { return p_; }
  double value_at_upper() const noexcept { return value_at_upper_; }

 private:
  int p_;
  double value_at_upper_;
};

}  // namespace rlap
