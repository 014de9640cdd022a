#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace oracle_loop {

/// Base class of every error raised by the engine.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed KB or formula text. Line and column are 1-based; line is 0 when
/// a lone formula (not a file) was parsed.
class ParseError : public Error {
 public:
  ParseError(std::string message, std::size_t line, std::size_t column);

  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }
  const std::string& detail() const noexcept { return detail_; }

 private:
  std::string detail_;
  std::size_t line_;
  std::size_t column_;
};

/// B together with P already violates the requirements, so no set of K
/// axioms can be blamed.
class NoDiagnosisError : public Error {
 public:
  using Error::Error;
};

/// The KB meets every requirement; there is nothing to debug.
class KbAlreadyValidError : public Error {
 public:
  using Error::Error;
};

/// An input exceeded a size guard of an exponential routine.
class GuardError : public Error {
 public:
  using Error::Error;
};

class UnrealizablePartitionError : public Error {
 public:
  using Error::Error;
};

/// Internal consistency check failed. Always a bug, never user error.
class InvariantBreach : public Error {
 public:
  using Error::Error;
};

class AnswerMismatchError : public Error {
 public:
  using Error::Error;
};

class GenerationFailedError : public Error {
 public:
  using Error::Error;
};

class IterationCapError : public Error {
 public:
  using Error::Error;
};

}  // namespace oracle_loop
