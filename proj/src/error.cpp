#include "dyneq/error.hpp"

namespace dyneq {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Parse: return "ParseError";
    case ErrorKind::Validation: return "ValidationError";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::Io: return "IoError";
    case ErrorKind::Divergence: return "Divergence";
    case ErrorKind::SingularNetwork: return "SingularNetwork";
    case ErrorKind::ConvergenceFailure: return "ConvergenceFailure";
    case ErrorKind::NoModeInBand: return "NoModeInBand";
    case ErrorKind::AmbiguousMode: return "AmbiguousMode";
    case ErrorKind::ZeroInjectionGroup: return "ZeroInjectionGroup";
    case ErrorKind::SingularSubmatrix: return "SingularSubmatrix";
    case ErrorKind::EmptyGroup: return "EmptyGroup";
    case ErrorKind::PoleOnGrid: return "PoleOnGrid";
    case ErrorKind::NonpositiveInertia: return "NonpositiveInertia";
    case ErrorKind::GridMismatch: return "GridMismatch";
    case ErrorKind::NearZeroH21: return "NearZeroH21";
    case ErrorKind::EmptyList: return "EmptyList";
    case ErrorKind::RankDeficient: return "RankDeficient";
    case ErrorKind::UnstableFit: return "UnstableFit";
    case ErrorKind::MissingRelation: return "MissingRelation";
    case ErrorKind::StepRejected: return "StepRejected";
    case ErrorKind::NumericBlowup: return "NumericBlowup";
    case ErrorKind::ChannelMissing: return "ChannelMissing";
  }
  return "Error";
}

namespace {

std::string compose(ErrorKind kind, const std::string& message,
                    const std::vector<std::string>& details) {
  std::string out{to_string(kind)};
  out += ": ";
  out += message;
  for (const auto& d : details) {
    out += "\n  - ";
    out += d;
  }
  return out;
}

}  // namespace

Error::Error(ErrorKind kind, std::string message, std::vector<std::string> details)
    : std::runtime_error(compose(kind, message, details)),
      kind_(kind),
      details_(std::move(details)) {}

}  // namespace dyneq
