#pragma once

#include <stdexcept>
#include <string>

namespace onfarm {

// Base class for all toolkit errors. Subclasses exist so callers can
// distinguish recoverable conditions (a single model failing to fit)
// from input problems (bad file, bad config).
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Input table is missing a required column.
class SchemaError : public Error {
public:
  using Error::Error;
};

// Input contained a header but no usable data rows.
class EmptyInputError : public Error {
public:
  using Error::Error;
};

// Row alignment produced more rows than the x extent admits.
class AlignmentError : public Error {
public:
  using Error::Error;
};

// Edge trimming removed every cell.
class EmptyInteriorError : public Error {
public:
  using Error::Error;
};

// Treatment layout is unidentifiable or geometrically invalid.
class DesignError : public Error {
public:
  using Error::Error;
};

// Argument outside the mathematical domain of an operation.
class DomainError : public Error {
public:
  using Error::Error;
};

// Covariance matrix could not be factorized even after conditioning.
class IllConditionedError : public Error {
public:
  using Error::Error;
};

// Design matrix (or a normal-equation block) is rank deficient.
class RankError : public Error {
public:
  using Error::Error;
};

// Every optimizer start failed.
class FitError : public Error {
public:
  using Error::Error;
};

// No lag bin survived the pair-count filter.
class EmptyVariogramError : public Error {
public:
  using Error::Error;
};

// Run configuration file is malformed or inconsistent.
class ConfigError : public Error {
public:
  using Error::Error;
};

}  // namespace onfarm
