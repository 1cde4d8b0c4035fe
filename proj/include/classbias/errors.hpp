#pragma once

#include <stdexcept>
#include <string>

namespace classbias {

/// Root of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Problems with the inputs themselves: files, columns, values, shapes.
/// The CLI maps these to exit status 2.
class InputError : public Error {
 public:
  using Error::Error;
};

class SchemaError : public InputError {
 public:
  using InputError::InputError;
};

class ValueError : public InputError {
 public:
  using InputError::InputError;
};

class EmptyInputError : public InputError {
 public:
  using InputError::InputError;
};

class AlignmentError : public InputError {
 public:
  using InputError::InputError;
};

class ArgumentError : public InputError {
 public:
  using InputError::InputError;
};

class UnsupportedTaskError : public InputError {
 public:
  using InputError::InputError;
};

class MissingScoreError : public InputError {
 public:
  using InputError::InputError;
};

/// The inputs are well formed but the requested quantity cannot be
/// computed from them (zero denominators, empty groups). Exit status 3.
class DegenerateError : public Error {
 public:
  using Error::Error;
};

class DegenerateInputError : public DegenerateError {
 public:
  using DegenerateError::DegenerateError;
};

class NormalizationDegenerateError : public DegenerateError {
 public:
  using DegenerateError::DegenerateError;
};

class EmptyGroupError : public DegenerateError {
 public:
  using DegenerateError::DegenerateError;
};

}  // namespace classbias
