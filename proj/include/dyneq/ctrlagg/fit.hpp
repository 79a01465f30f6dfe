#pragma once

#include <string_view>

#include "dyneq/ctrlagg/frequency_response.hpp"
#include "dyneq/ctrlagg/rational.hpp"

namespace dyneq::ctrlagg {

enum class FitWeighting { uniform, inverse_magnitude };

std::string_view to_string(FitWeighting w);
FitWeighting fit_weighting_from_string(std::string_view s);

struct FitOptions {
  FitWeighting weighting = FitWeighting::uniform;
  bool force = false;  // accept right-half-plane poles
  int max_iterations = 25;
  double tolerance = 1e-10;
};

struct FitReport {
  double max_rel_error = 0.0;
  double rms_rel_error = 0.0;
  int iterations = 0;
  bool converged = false;
};

struct FitResult {
  RationalTF tf;
  FitReport report;
};

// Levy linearized least squares followed by Sanathanan-Koerner reweighting.
// Requires num_order <= den_order and at least 2*(num_order + den_order + 2)
// samples. Throws RankDeficient or UnstableFit.
FitResult fit_rational(const FrequencyResponse& target, int num_order, int den_order,
                       const FitOptions& options = {});

// Relative error statistics of `tf` against `target` over the whole grid.
FitReport fit_quality(const RationalTF& tf, const FrequencyResponse& target);

}  // namespace dyneq::ctrlagg
