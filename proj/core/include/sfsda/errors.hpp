#pragma once

#include <stdexcept>
#include <string>

namespace sfsda {

/// Bad user input: files, flags, dimension mismatches, invalid configs.
class InputError : public std::runtime_error {
 public:
  explicit InputError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Numerical degeneracy: singular systems, vanishing truncation mass,
/// solver non-convergence. Carries no recovery protocol; callers map it
/// to a diagnostic and a nonzero exit.
class NumericError : public std::runtime_error {
 public:
  explicit NumericError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace sfsda
