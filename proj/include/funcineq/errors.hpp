#pragma once

#include <stdexcept>
#include <string>

namespace funcineq {

/// Malformed or invariant-violating input (space, field or profile data).
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An operation was called outside its admissible parameter window.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

}  // namespace funcineq
