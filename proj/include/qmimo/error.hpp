#pragma once

#include <stdexcept>
#include <string>

namespace qmimo {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A constructed operator would exceed the configured dimension cap, or the
// operands have incompatible shapes.
class DimensionError : public Error {
 public:
  using Error::Error;
};

// A partial operation named a mode label that is not in the space.
class LabelError : public Error {
 public:
  using Error::Error;
};

// An argument lies outside its admissible domain (simplex violation,
// probability out of range, invalid permutation, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

class NotHermitianError : public Error {
 public:
  using Error::Error;
};

class NotPsdError : public Error {
 public:
  using Error::Error;
};

// An iterative routine hit its iteration cap.
class ConvergenceError : public Error {
 public:
  using Error::Error;
};

// Configuration or input file could not be used.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace qmimo
