#pragma once

#include <stdexcept>
#include <string>

namespace dtdist {

/// Base class for every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A Point, Restriction or table does not match the ambient dimension.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// Malformed argument: repeated coordinate, fixed coordinate queried, bad sign...
class ArgumentError : public Error {
 public:
  using Error::Error;
};

/// An oracle was queried in a mode it was not granted.
class ModeError : public Error {
 public:
  using Error::Error;
};

/// A restriction (subcube) has zero probability mass.
class ZeroWeightError : public Error {
 public:
  using Error::Error;
};

/// A search, rejection or sample budget was exhausted.
class BudgetError : public Error {
 public:
  using Error::Error;
};

/// A file or JSON document could not be read or does not follow its schema.
class FormatError : public Error {
 public:
  using Error::Error;
};

/// Wraps a failure from a multi-stage pipeline together with the stage name.
class StageError : public Error {
 public:
  StageError(std::string stage, const std::string& what)
      : Error(stage + ": " + what), stage_(std::move(stage)) {}
  const std::string& stage() const noexcept { return stage_; }

 private:
  std::string stage_;
};

}  // namespace dtdist
