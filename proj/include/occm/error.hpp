#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace occm {

/// Base of every error the library throws. `reason()` is a short
/// machine-parsable tag, `what()` the human-readable message.
class Error : public std::runtime_error {
 public:
  Error(std::string reason, const std::string& message)
      : std::runtime_error(message), reason_(std::move(reason)) {}

  const std::string& reason() const noexcept { return reason_; }

 private:
  std::string reason_;
};

class ParseError : public Error {
 public:
  ParseError(std::size_t offset, const std::string& message)
      : Error("parse", message + " at byte " + std::to_string(offset)), offset_(offset) {}
  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

class EvalError : public Error {
 public:
  EvalError(std::size_t offset, const std::string& message)
      : Error("eval", message + " (expression byte " + std::to_string(offset) + ")"),
        offset_(offset) {}
  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

class DomainError : public Error {
 public:
  explicit DomainError(const std::string& message) : Error("domain", message) {}
};

class PreconditionError : public Error {
 public:
  explicit PreconditionError(const std::string& message) : Error("precondition", message) {}
};

class InfeasibleError : public Error {
 public:
  explicit InfeasibleError(const std::string& message) : Error("infeasible", message) {}
};

class NoConvergenceError : public Error {
 public:
  NoConvergenceError(const std::string& message, double last_objective)
      : Error("no-convergence", message), last_objective_(last_objective) {}
  double last_objective() const noexcept { return last_objective_; }

 private:
  double last_objective_;
};

class ExtractionError : public Error {
 public:
  explicit ExtractionError(const std::string& message) : Error("extraction", message) {}
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& message) : Error("config", message) {}
};

}  // namespace occm
