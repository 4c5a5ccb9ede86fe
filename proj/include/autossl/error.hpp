#pragma once

#include <stdexcept>
#include <string>

namespace autossl {

// Base of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A required input file is missing or unreadable.
class IngestionError : public Error {
 public:
  using Error::Error;
};

// Input file contents could not be parsed or are out of range.
class MalformedInputError : public Error {
 public:
  using Error::Error;
};

// Shapes of matrices/vectors disagree.
class DimensionError : public Error {
 public:
  using Error::Error;
};

// Invalid user configuration (counts, names, probabilities).
class ConfigError : public Error {
 public:
  using Error::Error;
};

// NaN/Inf encountered where finite values are required.
class NumericError : public Error {
 public:
  using Error::Error;
};

// Argument outside the mathematical domain of a function.
class DomainError : public Error {
 public:
  using Error::Error;
};

// Quantity is undefined for the given input (e.g. homophily of an edgeless graph).
class UndefinedError : public Error {
 public:
  using Error::Error;
};

// Test-oracle misuse, e.g. a non-deterministic loss handed to the gradient checker.
class OracleError : public Error {
 public:
  using Error::Error;
};

}  // namespace autossl
