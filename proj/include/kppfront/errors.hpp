#pragma once

#include <stdexcept>
#include <string>

namespace kpp {

// Bad input to an operation (sizes, ranges, malformed shapes).
class InvalidArgument : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

// A structural hypothesis of the model does not hold (e.g. mu(0) >= 0), so the
// requested quantity is undefined. Maps to CLI exit code 2.
class HypothesisViolation : public std::domain_error {
public:
  using std::domain_error::domain_error;
};

// A grid does not resolve the boundary layer of a heat-loss member.
class ResolutionError : public InvalidArgument {
public:
  ResolutionError(const std::string& what, int minimal_n)
      : InvalidArgument(what), minimal_n_(minimal_n) {}
  int minimal_n() const noexcept { return minimal_n_; }

private:
  int minimal_n_;
};

// Iteration failed to converge, a certificate was violated, or an internal
// consistency gate tripped. Maps to CLI exit code 3.
class NumericalFailure : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

} // namespace kpp
