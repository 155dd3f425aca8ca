#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace heomflow {

// Invalid user input: bad configuration values, unreadable data files,
// configurations rejected by the stability bound. Maps to CLI exit code 1.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
  explicit ConfigError(std::vector<std::string> problems);

  const std::vector<std::string>& problems() const { return problems_; }

 private:
  std::vector<std::string> problems_;
};

// The integration produced non-finite values or lost trace. Exit code 2.
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

// Caller broke a documented precondition (representation mismatch,
// non-Hermitian input to a trace distance, ...).
class ContractViolation : public std::logic_error {
 public:
  explicit ContractViolation(const std::string& what) : std::logic_error(what) {}
};

}  // namespace heomflow
