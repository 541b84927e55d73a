#pragma once

#include <stdexcept>
#include <string>

namespace fair {

// Invalid configuration: unknown names, violated invariants, infeasible topologies.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A caller broke an operation's precondition (empty input, honest node passed to
// the adversary, ...).
class PreconditionError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// Defuzzification over a fuzzy output with zero total weight.
class NoRuleFired : public std::runtime_error {
 public:
  NoRuleFired() : std::runtime_error("no rule fired: fuzzy output has zero weight") {}
};

// Finalizing an aggregate that received no contribution.
class NoData : public std::runtime_error {
 public:
  explicit NoData(const std::string& what = "no data to aggregate") : std::runtime_error(what) {}
};

}  // namespace fair
