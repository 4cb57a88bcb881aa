#include "diva/error.hpp"

#include <cmath>

#include "diva/rng.hpp"

namespace diva {

std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::GroupTooSmall: return "GroupTooSmall";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::DuplicateProblemId: return "DuplicateProblemId";
    case ErrorKind::UnknownProblemId: return "UnknownProblemId";
    case ErrorKind::ZeroTotal: return "ZeroTotal";
    case ErrorKind::MalformedSnapshot: return "MalformedSnapshot";
    case ErrorKind::ScoreOutOfRange: return "ScoreOutOfRange";
    case ErrorKind::IntensityOutOfRange: return "IntensityOutOfRange";
    case ErrorKind::ProbabilityOutOfRange: return "ProbabilityOutOfRange";
    case ErrorKind::SigmaOutOfRange: return "SigmaOutOfRange";
    case ErrorKind::ModeMismatch: return "ModeMismatch";
    case ErrorKind::UnsupportedFormat: return "UnsupportedFormat";
    case ErrorKind::CorruptHeader: return "CorruptHeader";
    case ErrorKind::LengthMismatch: return "LengthMismatch";
    case ErrorKind::DegenerateMu: return "DegenerateMu";
    case ErrorKind::FlatObjective: return "FlatObjective";
    case ErrorKind::TooFewBatches: return "TooFewBatches";
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::IoError: return "IoError";
  }
  return "Unknown";
}

double Rng::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  double u = 0.0, v = 0.0, s = 0.0;
  do {
    u = 2.0 * uniform() - 1.0;
    v = 2.0 * uniform() - 1.0;
    s = u * u + v * v;
  } while (s >= 1.0 || s == 0.0);
  const double f = std::sqrt(-2.0 * std::log(s) / s);
  spare_ = v * f;
  has_spare_ = true;
  return u * f;
}

}  // namespace diva
