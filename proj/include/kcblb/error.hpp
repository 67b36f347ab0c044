#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>

namespace kcblb {

enum class ErrorCode {
  LengthMismatch,
  NonFiniteValue,
  BadTreatmentCode,
  DimensionMismatch,
  InvalidArgument,
  NotPositiveDefinite,
  NonFiniteObjective,
  EmptyArm,
  SingleClassFold,
  TooManyFolds,
  ConfigInfeasible,
  CountSumMismatch,
  ZeroVariance,
  InsufficientGrid,
  BagFailure,
  ConfigError,
  MissingColumn,
  UnparseableRow,
  EmptyAfterFilter,
  Io,
};

const char* to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

// Input validation failure that points at a column and, when relevant, a row.
class DataError : public Error {
 public:
  DataError(ErrorCode code, std::string column, std::optional<std::size_t> row);

  const std::string& column() const noexcept { return column_; }
  std::optional<std::size_t> row() const noexcept { return row_; }

 private:
  std::string column_;
  std::optional<std::size_t> row_;
};

}  // namespace kcblb
