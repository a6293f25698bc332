#pragma once

#include <stdexcept>
#include <string>

namespace crnhj {

enum class ErrorKind {
  InvalidArgument,
  EmptyGrid,
  NoIntersection,
  Overflow,
  NoConvergence,
  StepTooSmall,
  StepTooLarge,
  SizeMismatch,
  CFLViolation,
  DegenerateRate,
  NoMatchingMesh,
  ParseError,
  ValidationError,
};

inline const char* error_kind_name(ErrorKind k) {
  switch (k) {
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::EmptyGrid: return "EmptyGrid";
    case ErrorKind::NoIntersection: return "NoIntersection";
    case ErrorKind::Overflow: return "Overflow";
    case ErrorKind::NoConvergence: return "NoConvergence";
    case ErrorKind::StepTooSmall: return "StepTooSmall";
    case ErrorKind::StepTooLarge: return "StepTooLarge";
    case ErrorKind::SizeMismatch: return "SizeMismatch";
    case ErrorKind::CFLViolation: return "CFLViolation";
    case ErrorKind::DegenerateRate: return "DegenerateRate";
    case ErrorKind::NoMatchingMesh: return "NoMatchingMesh";
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::ValidationError: return "ValidationError";
  }
  return "Unknown";
}

/** Single exception type for the library; the kind is machine-readable. */
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }
  const char* kind_name() const noexcept { return error_kind_name(kind_); }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) {
  throw Error(kind, what);
}

}  // namespace crnhj
