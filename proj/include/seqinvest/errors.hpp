#pragma once

#include <stdexcept>
#include <string>

namespace seqinvest {

// Argument outside the domain a function is defined on (negative or
// non-finite investment, evaluation beyond the validated cap, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// A reward rule whose constructor arguments break balance or
// non-negativity. The message names the offending row.
class RuleConstructionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A requested object does not exist: a target profile that no rule can
// support, an empty feasible set, a continuation value out of reach.
class InfeasibleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A bracketing solver could not find a sign change.
class BracketError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Rule and profile structure cannot be reconciled for a finite check, e.g.
// a rule whose columns never become stationary across agents.
class ShapeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed textual input (rule specs, profiles, configuration values).
class ParseError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace seqinvest
