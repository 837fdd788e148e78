#pragma once

#include <stdexcept>
#include <string>

namespace fingen {

// Base for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class GeometryError : public Error {
 public:
  using Error::Error;
};

// Adjacent Bezier segments do not share their junction point.
class ContinuityError : public GeometryError {
 public:
  using GeometryError::GeometryError;
};

// An operation was called on an input that violates its documented precondition.
class PreconditionError : public Error {
 public:
  using Error::Error;
};

// Grid too coarse for a shape (necks or features thinner than two cells).
class ResolutionError : public Error {
 public:
  using Error::Error;
};

class ShapeError : public Error {
 public:
  using Error::Error;
};

// Backward pass requested without a recorded forward pass.
class StateError : public Error {
 public:
  using Error::Error;
};

class InputError : public Error {
 public:
  using Error::Error;
};

class TrainingError : public Error {
 public:
  using Error::Error;
};

// Dataset sampler rejects nearly every candidate.
class GenerationError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  using Error::Error;
};

}  // namespace fingen
