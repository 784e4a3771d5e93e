#pragma once

#include <stdexcept>
#include <string>

namespace fnmt {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Operand shapes are incompatible.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// Non-finite value where a finite one is required.
class NumericError : public Error {
 public:
  using Error::Error;
};

/// A documented precondition was violated by the caller.
class ContractError : public Error {
 public:
  using Error::Error;
};

/// Malformed input text (lexicon, corpus, config, checkpoint).
class ParseError : public Error {
 public:
  using Error::Error;
};

/// Input is well formed but internally inconsistent.
class ConsistencyError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Corpus-level data problems (mismatched line counts, empty sets).
class DataError : public Error {
 public:
  using Error::Error;
};

/// Checkpoint and companion resources do not belong together.
class CompatibilityError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace fnmt
