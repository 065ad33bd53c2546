#pragma once

#include <stdexcept>
#include <string>

namespace cmfomp {

// Root of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid argument: out-of-range parameter, dimension mismatch, empty input.
class ParameterError : public Error {
 public:
  using Error::Error;
};

// Gram factorization failed or a pivot fell below the near-singularity cutoff.
class DegenerateSupportError : public Error {
 public:
  using Error::Error;
};

// Non-finite evaluation, or a quadratic form that is negative beyond rounding.
class NumericError : public Error {
 public:
  using Error::Error;
};

// Atom selection requested on an all-zero residual.
class EmptyResidualError : public Error {
 public:
  using Error::Error;
};

// Reconstruction report requested on a trace that did not reach zero residual.
class NotApplicableError : public Error {
 public:
  using Error::Error;
};

// Adversarial construction requested at a probe where the ERC still holds.
class CertificateHoldsError : public Error {
 public:
  using Error::Error;
};

}  // namespace cmfomp
