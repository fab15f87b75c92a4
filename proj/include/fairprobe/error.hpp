#pragma once

#include <stdexcept>
#include <string>

namespace fairprobe {

// Base for every error raised by the library. The CLI maps UsageError and
// SchemaError-like configuration problems to exit status 2, the rest to 1.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class SchemaError : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  using Error::Error;
};

class BoundError : public Error {
 public:
  using Error::Error;
};

class SpecError : public Error {
 public:
  using Error::Error;
};

class TrainingError : public Error {
 public:
  using Error::Error;
};

// Violated precondition of an operation (e.g. perturbing a protected parameter).
class ContractError : public Error {
 public:
  using Error::Error;
};

// Internal state no longer satisfies its invariants. Never repaired silently.
class InvariantError : public Error {
 public:
  using Error::Error;
};

// External model: the child process went away or the pipe broke. Retryable.
class TransportError : public Error {
 public:
  using Error::Error;
};

// External model: the child answered with something that breaks the protocol.
class ProtocolError : public Error {
 public:
  using Error::Error;
};

class UsageError : public Error {
 public:
  using Error::Error;
};

}  // namespace fairprobe
