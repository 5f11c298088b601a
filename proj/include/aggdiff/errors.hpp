#pragma once

#include <stdexcept>
#include <string>

namespace aggdiff {

class DomainError : public std::domain_error {
public:
  using std::domain_error::domain_error;
};

class ArgumentError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

// thrown when adaptive refinement runs out of depth before meeting tolerance
class AccuracyError : public std::runtime_error {
public:
  AccuracyError(const std::string& what, double value, double error)
      : std::runtime_error(what), partial_value(value), partial_error(error) {}
  double partial_value;
  double partial_error;
};

}  // namespace aggdiff
