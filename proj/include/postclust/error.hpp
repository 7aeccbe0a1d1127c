#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace postclust {

/// Malformed input record. `line()` is 1-based.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& source, std::size_t line, const std::string& what)
      : std::runtime_error(source + ":" + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// Bad command-line usage or an unusable input (unknown format, empty corpus).
class UsageError : public std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// A precondition on a function argument does not hold.
class ArgumentError : public std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// Unknown key: term, cluster, label.
class LookupError : public std::out_of_range {
  using std::out_of_range::out_of_range;
};

/// A run was stopped because its deadline passed.
class Cancelled : public std::runtime_error {
 public:
  Cancelled() : std::runtime_error("run exceeded its time budget") {}
};

}  // namespace postclust
