#pragma once

#include <stdexcept>
#include <string>

namespace expsum {

enum class ErrorKind {
  InvalidPoint,
  DimensionTooSmall,
  Overflow,
  NoConvergence,
  DegenerateDraw,
  SeriesDivergence,
  StepUnderflow,
  RetractionFailed,
  IllConditioned,
  Parse,
};

inline const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidPoint: return "InvalidPoint";
    case ErrorKind::DimensionTooSmall: return "DimensionTooSmall";
    case ErrorKind::Overflow: return "Overflow";
    case ErrorKind::NoConvergence: return "NoConvergence";
    case ErrorKind::DegenerateDraw: return "DegenerateDraw";
    case ErrorKind::SeriesDivergence: return "SeriesDivergence";
    case ErrorKind::StepUnderflow: return "StepUnderflow";
    case ErrorKind::RetractionFailed: return "RetractionFailed";
    case ErrorKind::IllConditioned: return "IllConditioned";
    case ErrorKind::Parse: return "Parse";
  }
  return "Unknown";
}

/// Every failure raised by the library carries a kind so callers (and the
/// CLI exit-code mapping) can dispatch without string matching.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace expsum
