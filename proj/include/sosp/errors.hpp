#pragma once

#include <stdexcept>
#include <string>

namespace sosp {

// Invalid configuration (maps to CLI exit code 2).
struct ConfigError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// A query or call with malformed inputs (wrong dimension, non-finite entries).
struct InputError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// A precondition of an algorithm is not met by the supplied oracle or model.
struct ContractError : std::logic_error {
  using std::logic_error::logic_error;
};

// A run would exceed the configured query budget.
struct BudgetError : std::runtime_error {
  BudgetError(const std::string& what, double required_queries, double cap)
      : std::runtime_error(what), required(required_queries), cap(cap) {}
  double required;
  double cap;
};

}  // namespace sosp
