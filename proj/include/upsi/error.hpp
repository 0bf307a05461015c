#pragma once

#include <stdexcept>
#include <string>

namespace upsi {

/// Invalid input: malformed data, dimension or length mismatch, bad parameters.
class InputError : public std::invalid_argument {
 public:
  explicit InputError(const std::string& what) : std::invalid_argument(what) {}
};

/// Exact (enumerative) evaluation requested beyond the m^n <= 2^24 cutoff.
class InfeasibleExactError : public std::runtime_error {
 public:
  explicit InfeasibleExactError(const std::string& what) : std::runtime_error(what) {}
};

/// Stateful object used out of order (e.g. stepping past an epoch boundary).
class StateError : public std::logic_error {
 public:
  explicit StateError(const std::string& what) : std::logic_error(what) {}
};

}  // namespace upsi
