#pragma once

#include <stdexcept>
#include <string>

namespace turnback {

// Root of every error the library throws. The CLI maps subclasses to exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Input could not be read or written.
class IoError : public Error {
 public:
  using Error::Error;
};

// Malformed JSON / JSONL.
class ParseError : public Error {
 public:
  using Error::Error;
};

// Well-formed input that violates the expected layout or a structural invariant.
class SchemaError : public Error {
 public:
  using Error::Error;
};

// A belief state violates set semantics (e.g. two values for one slot).
class StateError : public Error {
 public:
  using Error::Error;
};

class UnknownSlotError : public Error {
 public:
  using Error::Error;
};

class IndexError : public Error {
 public:
  using Error::Error;
};

class MissingPlaceholderError : public Error {
 public:
  using Error::Error;
};

class MissingDisplayNameError : public Error {
 public:
  using Error::Error;
};

class EmptyGroupError : public Error {
 public:
  using Error::Error;
};

class NoEligibleSlotError : public Error {
 public:
  using Error::Error;
};

class ExhaustedValuesError : public Error {
 public:
  using Error::Error;
};

class DuplicateError : public Error {
 public:
  using Error::Error;
};

class UnknownDialogueError : public Error {
 public:
  using Error::Error;
};

class CoverageError : public Error {
 public:
  using Error::Error;
};

// Invalid argument to an operation (e.g. a proportion outside 0..100).
class ArgumentError : public Error {
 public:
  using Error::Error;
};

// Raised when asked to report on a corpus with no turns.
class EmptyReportError : public Error {
 public:
  using Error::Error;
};

}  // namespace turnback
