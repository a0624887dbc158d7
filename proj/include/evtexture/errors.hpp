#pragma once

#include <stdexcept>
#include <string>

namespace evtexture {

/// Precondition violation on caller-supplied data (shapes, ranges, flags).
class InvalidInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A stream whose first and last timestamps coincide cannot be binned in time.
class DegenerateStream : public InvalidInput {
 public:
  using InvalidInput::InvalidInput;
};

/// Operation requested on a model built without the needed component.
class UnsupportedOperation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// File could not be opened, read, or written. The message carries the path.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Training produced a non-finite loss.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace evtexture
