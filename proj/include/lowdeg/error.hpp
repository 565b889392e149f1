#pragma once

#include <stdexcept>
#include <string>

namespace lowdeg {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A user-supplied object (prior, model, config) violates a documented invariant.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// An enumeration or allocation would exceed its configured cap.
class CapExceeded : public Error {
 public:
  using Error::Error;
};

/// The requested operation is not defined for this prior or model.
class Unsupported : public Error {
 public:
  using Error::Error;
};

}  // namespace lowdeg
