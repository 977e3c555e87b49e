#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace tcircle {

enum class ErrorCode {
  NonMonotoneLift,
  RootNotBracketed,
  DepthExceeded,
  OutOfDomain,
  InvalidElement,
  NeighborhoodTooSmall,
  NotExceptional,
  NoNiceIntervalFound,
  ChainNotDisjoint,
  BudgetExceeded,
  InvalidInput,
};

inline std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::NonMonotoneLift: return "NonMonotoneLift";
    case ErrorCode::RootNotBracketed: return "RootNotBracketed";
    case ErrorCode::DepthExceeded: return "DepthExceeded";
    case ErrorCode::OutOfDomain: return "OutOfDomain";
    case ErrorCode::InvalidElement: return "InvalidElement";
    case ErrorCode::NeighborhoodTooSmall: return "NeighborhoodTooSmall";
    case ErrorCode::NotExceptional: return "NotExceptional";
    case ErrorCode::NoNiceIntervalFound: return "NoNiceIntervalFound";
    case ErrorCode::ChainNotDisjoint: return "ChainNotDisjoint";
    case ErrorCode::BudgetExceeded: return "BudgetExceeded";
    case ErrorCode::InvalidInput: return "InvalidInput";
  }
  return "Unknown";
}

/// Every failure raised by the library carries one of the codes above so
/// callers (the CLI in particular) can map it without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace tcircle
