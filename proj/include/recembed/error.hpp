#pragma once

#include <stdexcept>
#include <string>

namespace recembed {

/// Raised when an operation's inputs violate its domain (bad exponent,
/// dimension mismatch, radius violation, ...). The CLI maps it to exit code 1.
class DomainError : public std::invalid_argument {
 public:
  explicit DomainError(const std::string& what) : std::invalid_argument(what) {}
};

}  // namespace recembed
