#pragma once

#include <stdexcept>
#include <string>

namespace lpde {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A precondition on caller-supplied values or configuration was violated.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// A file could not be read, written, or parsed.
class IoError : public Error {
 public:
  using Error::Error;
};

/// The numerics failed (divergence, singular system).
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// The explicit scheme left the admissible range at a given time index.
class BlowUpError : public NumericalError {
 public:
  explicit BlowUpError(int time_index)
      : NumericalError("evolution blew up at time index " + std::to_string(time_index)),
        time_index_(time_index) {}

  int time_index() const noexcept { return time_index_; }

 private:
  int time_index_;
};

}  // namespace lpde
