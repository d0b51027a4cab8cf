#pragma once

#include <stdexcept>
#include <string>

namespace coverscan {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A precondition on an argument was violated (bad dimensions, out-of-range
/// parameter, rectangle outside the image, ...).
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// File could not be opened, read or written.
class IoError : public Error {
 public:
  using Error::Error;
};

/// File exists but its contents are not in a supported format.
class FormatError : public Error {
 public:
  using Error::Error;
};

/// Index file failed its integrity check or ended early.
class CorruptFileError : public FormatError {
 public:
  using FormatError::FormatError;
};

/// Index file carries a format version this build does not understand.
class VersionError : public FormatError {
 public:
  using FormatError::FormatError;
};

/// Detector or descriptor configuration does not match what a stored index
/// (or another descriptor set) was built with.
class ConfigMismatchError : public Error {
 public:
  using Error::Error;
};

/// An image produced no usable features where at least one was required.
class NoFeaturesError : public Error {
 public:
  using Error::Error;
};

}  // namespace coverscan
