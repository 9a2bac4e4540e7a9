#pragma once
// Error hierarchy. Each top-level family maps to a distinct CLI exit code.

#include <stdexcept>
#include <string>

namespace ccprobe {

// Bad configuration or invalid command-line input.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Input data or persisted artifact is unusable.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ParseError : public DataError {
 public:
  using DataError::DataError;
};

class IncompatibleVersionError : public DataError {
 public:
  using DataError::DataError;
};

// Scoring backend failures.
class BackendError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Remote service unreachable after retries. Carries the offending prompt.
class ScoringError : public BackendError {
 public:
  ScoringError(const std::string& what, std::string prompt)
      : BackendError(what), prompt_(std::move(prompt)) {}
  const std::string& prompt() const noexcept { return prompt_; }

 private:
  std::string prompt_;
};

// Remote answered, but the answer violates the wire contract.
class ProtocolError : public BackendError {
 public:
  using BackendError::BackendError;
};

// The mock backend received a query without resolvable run-side metadata.
class MockProtocolError : public BackendError {
 public:
  using BackendError::BackendError;
};

// A caller violated an operation precondition.
class PreconditionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A metric is mathematically undefined for the given input (e.g. AP with no
// positive labels).
class UndefinedMetricError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

}  // namespace ccprobe
