#pragma once

#include <stdexcept>
#include <string>

namespace linsys {

/// A model parameter is outside its admissible range.
class InvalidParameter : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A kernel violates one of the standing model assumptions (boundedness,
/// truly d-dimensional mean kernel, non-conservative total mass).
class AssumptionViolation : public std::invalid_argument {
 public:
  AssumptionViolation(std::string assumption, const std::string& what)
      : std::invalid_argument(what), assumption_(std::move(assumption)) {}
  const std::string& assumption() const { return assumption_; }

 private:
  std::string assumption_;
};

/// An operation was attempted on a state that does not admit it,
/// e.g. stepping an extinct configuration.
class InvalidState : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// The mean kernel has no off-origin mass, so no jump law exists.
class DegenerateKernel : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// The Green function is infinite (recurrent walk, d <= 2).
class DivergentGreenFunction : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// A precondition on a computed statistic does not hold.
class ConditionNotSatisfied : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

}  // namespace linsys
