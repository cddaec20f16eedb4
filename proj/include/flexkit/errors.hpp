#pragma once

#include <stdexcept>
#include <string>

namespace flexkit {

/// Root of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A value or message breaks a model invariant or lacks a mandatory attribute.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Malformed text: JSON syntax, datetimes, non-numeric bounds.
class ParseError : public Error {
 public:
  using Error::Error;
};

/// Two sequences that must line up do not (schedule vs. profile, prices vs. slices).
class ShapeError : public Error {
 public:
  using Error::Error;
};

class RangeError : public Error {
 public:
  using Error::Error;
};

class DomainError : public Error {
 public:
  using Error::Error;
};

class InvalidTransition : public Error {
 public:
  using Error::Error;
};

class UnsupportedInstance : public Error {
 public:
  using Error::Error;
};

class GenerationError : public Error {
 public:
  using Error::Error;
};

}  // namespace flexkit
