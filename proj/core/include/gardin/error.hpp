#pragma once

#include <stdexcept>
#include <string>

namespace gardin {

/// Base class for all errors raised by this library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid argument or violated type invariant (bad image range, shape mismatch, ...).
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Malformed input file; messages carry the file name and line number where known.
class ParseError : public Error {
 public:
  using Error::Error;
};

/// Filesystem or codec failure.
class IoError : public Error {
 public:
  using Error::Error;
};

/// A pipeline stage was invoked before its upstream artifact exists.
class MissingArtifactError : public Error {
 public:
  using Error::Error;
};

/// Non-finite loss or other numerical breakdown.
class NumericsError : public Error {
 public:
  using Error::Error;
};

/// ROC-AUC requested on single-class ground truth.
class UndefinedAucError : public Error {
 public:
  using Error::Error;
};

}  // namespace gardin
