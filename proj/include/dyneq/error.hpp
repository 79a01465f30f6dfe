#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace dyneq {

enum class ErrorKind {
  Parse,
  Validation,
  InvalidArgument,
  Io,
  Divergence,
  SingularNetwork,
  ConvergenceFailure,
  NoModeInBand,
  AmbiguousMode,
  ZeroInjectionGroup,
  SingularSubmatrix,
  EmptyGroup,
  PoleOnGrid,
  NonpositiveInertia,
  GridMismatch,
  NearZeroH21,
  EmptyList,
  RankDeficient,
  UnstableFit,
  MissingRelation,
  StepRejected,
  NumericBlowup,
  ChannelMissing,
};

std::string_view to_string(ErrorKind kind);

// Every failure raised by the library. `details` carries one entry per
// violation for errors that collect several (validation).
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, std::string message, std::vector<std::string> details = {});

  ErrorKind kind() const noexcept { return kind_; }
  const std::vector<std::string>& details() const noexcept { return details_; }

 private:
  ErrorKind kind_;
  std::vector<std::string> details_;
};

}  // namespace dyneq
