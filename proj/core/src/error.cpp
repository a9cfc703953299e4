#include "censusflow/error.hpp"

namespace censusflow {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::UnknownToken: return "UnknownToken";
    case ErrorCode::MalformedLabel: return "MalformedLabel";
    case ErrorCode::InvalidRecord: return "InvalidRecord";
    case ErrorCode::TokenBudgetExceeded: return "TokenBudgetExceeded";
    case ErrorCode::InvalidProfile: return "InvalidProfile";
    case ErrorCode::MissingTranscript: return "MissingTranscript";
    case ErrorCode::UniverseMismatch: return "UniverseMismatch";
    case ErrorCode::NoMatchingPages: return "NoMatchingPages";
    case ErrorCode::MissingColumn: return "MissingColumn";
    case ErrorCode::EmptyFile: return "EmptyFile";
    case ErrorCode::EmptyGazetteer: return "EmptyGazetteer";
    case ErrorCode::EmptyIdentifier: return "EmptyIdentifier";
    case ErrorCode::EmptySelection: return "EmptySelection";
    case ErrorCode::ConfigInvalid: return "ConfigInvalid";
    case ErrorCode::InvalidModel: return "InvalidModel";
    case ErrorCode::Infeasible: return "Infeasible";
    case ErrorCode::IsolationViolation: return "IsolationViolation";
    case ErrorCode::Interrupted: return "Interrupted";
    case ErrorCode::WorkerFailure: return "WorkerFailure";
    case ErrorCode::Parse: return "Parse";
    case ErrorCode::InvalidTransition: return "InvalidTransition";
    case ErrorCode::Io: return "Io";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

MalformedLabel::MalformedLabel(std::size_t position, const std::string& what)
    : Error(ErrorCode::MalformedLabel, what + " at position " + std::to_string(position)),
      position_(position) {}

}  // namespace censusflow
