#pragma once

#include <stdexcept>
#include <string>

namespace moodisp {

/// Invalid arguments or values outside an operator's domain (e.g. a degenerate
/// exposure handed to the brightness exponent).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Malformed, truncated or unsupported files and unwritable paths.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Record sets that cannot support the requested analysis.
class InsufficientDataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A valence/arousal label sitting on a quadrant border.
class BorderCaseError : public DomainError {
 public:
  using DomainError::DomainError;
};

}  // namespace moodisp
