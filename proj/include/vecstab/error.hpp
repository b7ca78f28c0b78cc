#pragma once

#include <stdexcept>
#include <string>

namespace vecstab {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid configuration or gains (violated construction invariant).
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// A matrix that must be invertible or positive definite is not.
class DegenerateError : public Error {
 public:
  using Error::Error;
};

/// Non-finite state or excessive unit-norm drift during integration.
class IntegrationError : public Error {
 public:
  using Error::Error;
};

/// Iterative eigensolver exceeded its iteration cap.
class ConvergenceError : public Error {
 public:
  using Error::Error;
};

/// The genericity hypothesis (simple eigenvalues of W_rho) does not hold.
class GenericityError : public Error {
 public:
  using Error::Error;
};

}  // namespace vecstab
