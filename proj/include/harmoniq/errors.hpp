#pragma once

#include <stdexcept>
#include <string>

namespace harmoniq {

// Error taxonomy shared across the library. The CLI maps these onto its
// exit-code contract: invalid input and I/O failures -> 2, verification
// failures -> 3, convergence failures -> 4.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Malformed or inconsistent input documents, bad parameters.
struct InvalidInputError : Error {
  using Error::Error;
};

// A numerical check failed (residual gate, norm identity, stability scan).
struct VerificationError : Error {
  using Error::Error;
};

// An iterative procedure did not reach its tolerance.
struct ConvergenceError : Error {
  using Error::Error;
};

// File system and serialization problems.
struct IoError : Error {
  using Error::Error;
};

}  // namespace harmoniq
