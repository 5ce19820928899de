#pragma once

#include <stdexcept>
#include <string>

namespace pwcc {

// Every failure raised by the library derives from Error. The CLI maps the
// category to an exit code (2 usage/config, 3 runtime, 4 I/O).
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A non-finite or otherwise unusable value inside an image or map.
class InvalidInputError : public Error {
 public:
  using Error::Error;
};

class InvalidArgumentError : public Error {
 public:
  using Error::Error;
};

// Two operands whose dimensions are required to agree do not.
class ShapeError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

class FileNotFoundError : public IoError {
 public:
  using IoError::IoError;
};

// A file exists and was readable but its content is not the expected format.
class FormatError : public IoError {
 public:
  using IoError::IoError;
};

class BadMagicError : public FormatError {
 public:
  using FormatError::FormatError;
};

class TruncatedError : public FormatError {
 public:
  using FormatError::FormatError;
};

class UnsupportedVersionError : public FormatError {
 public:
  using FormatError::FormatError;
};

class UnsupportedBitDepthError : public FormatError {
 public:
  using FormatError::FormatError;
};

class UnsupportedChannelCountError : public FormatError {
 public:
  using FormatError::FormatError;
};

// Gray World / White Patch cannot produce an estimate (empty channel).
class EstimationError : public Error {
 public:
  using Error::Error;
};

// Training produced a non-finite loss.
class DivergenceError : public Error {
 public:
  DivergenceError(int epoch, int batch, const std::string& what)
      : Error(what), epoch_(epoch), batch_(batch) {}

  int epoch() const { return epoch_; }
  int batch() const { return batch_; }

 private:
  int epoch_;
  int batch_;
};

// cache / parameter set handed to backward() do not belong together.
class ConsistencyError : public Error {
 public:
  using Error::Error;
};

}  // namespace pwcc
