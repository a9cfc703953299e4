#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

namespace censusflow {

enum class ErrorCode {
  UnknownToken,
  MalformedLabel,
  InvalidRecord,
  TokenBudgetExceeded,
  InvalidProfile,
  MissingTranscript,
  UniverseMismatch,
  NoMatchingPages,
  MissingColumn,
  EmptyFile,
  EmptyGazetteer,
  EmptyIdentifier,
  EmptySelection,
  ConfigInvalid,
  InvalidModel,
  Infeasible,
  IsolationViolation,
  Interrupted,
  WorkerFailure,
  Parse,
  InvalidTransition,
  Io,
};

std::string_view to_string(ErrorCode code);

// Base exception for every recoverable failure the library reports.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

class MalformedLabel : public Error {
 public:
  // position is the 1-based code-point column of the offending item.
  MalformedLabel(std::size_t position, const std::string& what);

  std::size_t position() const noexcept { return position_; }

 private:
  std::size_t position_;
};

}  // namespace censusflow
