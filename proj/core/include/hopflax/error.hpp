#pragma once

#include <stdexcept>
#include <string>

namespace hopflax {

/// Raised when an operation's input violates its contract (bad index,
/// malformed graph, mismatched field binding, degenerate witness, ...).
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised for requests a particular input kind cannot serve (e.g. the 1-D
/// transport oracle on a non-path space, or refining a file-backed space).
class Unsupported : public Error {
 public:
  using Error::Error;
};

}  // namespace hopflax
