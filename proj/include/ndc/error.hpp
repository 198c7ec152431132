#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace ndc {

enum class ErrorCode {
  InvalidArgument,  // malformed or out-of-range input
  GridMismatch,     // spectra on different frequency grids
  GridTooCoarse,    // sampling too sparse, or temporal density wraps
  GridTooNarrow,    // grid does not cover the support
  DegenerateState,  // quantity undefined for this state (e.g. zero variance)
  WindowTooSmall,   // shutter window too short for the signal profile
  BatchTooSmall,    // not enough events for an estimator
};

constexpr std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::GridMismatch: return "GridMismatch";
    case ErrorCode::GridTooCoarse: return "GridTooCoarse";
    case ErrorCode::GridTooNarrow: return "GridTooNarrow";
    case ErrorCode::DegenerateState: return "DegenerateState";
    case ErrorCode::WindowTooSmall: return "WindowTooSmall";
    case ErrorCode::BatchTooSmall: return "BatchTooSmall";
  }
  return "Unknown";
}

/// Validation-class errors are caller mistakes; the rest are numerical
/// preconditions that depend on the chosen discretization or statistics.
constexpr bool is_validation_error(ErrorCode code) {
  return code == ErrorCode::InvalidArgument || code == ErrorCode::GridMismatch;
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

namespace detail {

inline void require(bool cond, ErrorCode code, const std::string& what) {
  if (!cond) throw Error(code, what);
}

}  // namespace detail
}  // namespace ndc
