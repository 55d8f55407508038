#pragma once

#include <stdexcept>
#include <string>

namespace jtenso {

enum class ErrorCode {
  NoConvergence,
  SingularJacobian,
  DefectiveMatrix,
  StepSizeUnderflow,
  NonFiniteState,
  ZeroIterate,
  DegenerateGeometry,
  NoReturn,
  NotSaddleFocus,
  InvalidBracket,
  NoEpochs,
  Undecided,
  InvalidArgument,
  Config,
};

const char* to_string(ErrorCode code);

/// Every failure raised by the library carries one of the codes above so the
/// CLI can map it onto an exit status.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

inline const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::NoConvergence: return "NoConvergence";
    case ErrorCode::SingularJacobian: return "SingularJacobian";
    case ErrorCode::DefectiveMatrix: return "DefectiveMatrix";
    case ErrorCode::StepSizeUnderflow: return "StepSizeUnderflow";
    case ErrorCode::NonFiniteState: return "NonFiniteState";
    case ErrorCode::ZeroIterate: return "ZeroIterate";
    case ErrorCode::DegenerateGeometry: return "DegenerateGeometry";
    case ErrorCode::NoReturn: return "NoReturn";
    case ErrorCode::NotSaddleFocus: return "NotSaddleFocus";
    case ErrorCode::InvalidBracket: return "InvalidBracket";
    case ErrorCode::NoEpochs: return "NoEpochs";
    case ErrorCode::Undecided: return "Undecided";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::Config: return "Config";
  }
  return "Unknown";
}

}  // namespace jtenso
