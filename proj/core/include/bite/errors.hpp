#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace bite {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed dataset, config or trigger-list input. `line` is 1-based, 0 when unknown.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line = 0)
      : Error(line ? "line " + std::to_string(line) + ": " + what : what), line_(line), detail_(what) {}
  // "<source>:<line>: <what>"
  ParseError(const std::string& source, const ParseError& inner)
      : Error(source + ":" + (inner.line_ ? std::to_string(inner.line_) + ": " : " ") + inner.detail_),
        line_(inner.line_),
        detail_(inner.detail_) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
  std::string detail_;
};

class EmptyDatasetError : public Error {
 public:
  using Error::Error;
};

class UnknownLabelError : public Error {
 public:
  using Error::Error;
};

class AbsentWordError : public Error {
 public:
  using Error::Error;
};

/// Raised when a label distribution has n_target in {0, n}; the z statistic is undefined there.
class DegenerateDistributionError : public Error {
 public:
  using Error::Error;
};

class ConflictError : public Error {
 public:
  using Error::Error;
};

class PositionError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class VictimError : public Error {
 public:
  using Error::Error;
};

/// Transport or protocol failure talking to a proposer or scorer.
class ProviderError : public Error {
 public:
  ProviderError(const std::string& what, int attempts, bool retryable, int status = 0)
      : Error(what), attempts_(attempts), retryable_(retryable), status_(status) {}

  int attempts() const noexcept { return attempts_; }
  bool retryable() const noexcept { return retryable_; }
  /// HTTP status of the last response, 0 for transport-level failures.
  int status() const noexcept { return status_; }

 private:
  int attempts_;
  bool retryable_;
  int status_;
};

}  // namespace bite
