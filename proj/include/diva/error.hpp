#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace diva {

enum class ErrorKind {
  GroupTooSmall,
  InvalidArgument,
  DuplicateProblemId,
  UnknownProblemId,
  ZeroTotal,
  MalformedSnapshot,
  ScoreOutOfRange,
  IntensityOutOfRange,
  ProbabilityOutOfRange,
  SigmaOutOfRange,
  ModeMismatch,
  UnsupportedFormat,
  CorruptHeader,
  LengthMismatch,
  DegenerateMu,
  FlatObjective,
  TooFewBatches,
  ParseError,
  IoError,
};

std::string_view to_string(ErrorKind kind) noexcept;

/// Single exception type for the library; callers branch on kind().
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace diva
