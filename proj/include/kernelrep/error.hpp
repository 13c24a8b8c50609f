#pragma once

#include <stdexcept>
#include <string>

namespace kernelrep {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed arguments: dimension or shape mismatches, out-of-range parameters.
class InputError : public Error {
 public:
  using Error::Error;
};

/// Argument outside the mathematical domain of a kernel (e.g. zero vector for relu_ntk).
class DomainError : public Error {
 public:
  using Error::Error;
};

class NotPsdError : public Error {
 public:
  using Error::Error;
};

/// Linear system is singular at the requested jitter; raise the jitter.
class SingularError : public Error {
 public:
  using Error::Error;
};

class RankError : public Error {
 public:
  using Error::Error;
};

/// Iterative fit diverged; use a smaller step.
class OptimizationError : public Error {
 public:
  using Error::Error;
};

class LoadError : public Error {
 public:
  using Error::Error;
};

class SplitError : public Error {
 public:
  using Error::Error;
};

class StateError : public Error {
 public:
  using Error::Error;
};

class UnsupportedError : public Error {
 public:
  using Error::Error;
};

class SelectionError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace kernelrep
