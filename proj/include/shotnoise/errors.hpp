#pragma once

#include <stdexcept>
#include <string>

namespace shotnoise {

// Invalid distribution or configuration parameter.
class ParameterError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Argument outside the domain of a function (t <= 1 for a(t), etc.).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// A numerical invariant of a constructed object was violated.
class InvariantError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace shotnoise
