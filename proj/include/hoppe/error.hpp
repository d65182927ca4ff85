#pragma once

#include <stdexcept>
#include <string>

namespace hoppe {

/// Thrown when an argument violates an operation's precondition.
class ParameterError : public std::invalid_argument {
 public:
  explicit ParameterError(const std::string& what) : std::invalid_argument(what) {}
};

}  // namespace hoppe
