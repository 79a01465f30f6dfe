#pragma once

#include <optional>
#include <string>
#include <vector>

#include "dyneq/model/case.hpp"

namespace dyneq::genagg {

struct BaseConversion {
  std::string id;
  double rated_mva = 0.0;
  double xd_prime_own = 0.0;     // pu on the member rating
  double xd_prime_common = 0.0;  // pu on the combined rating
  double kinetic_energy = 0.0;   // H * S, MW s
  std::optional<Complex> emf;    // base-case internal EMF, system pu
};

struct EquivalentGenerator {
  Generator generator;
  std::vector<std::string> members;  // sorted
  std::vector<BaseConversion> base_conversion_log;
  std::optional<Complex> mean_emf;       // current-weighted mean of member EMFs
  double emf_angle_spread_deg = 0.0;     // widest pairwise spread of member EMF angles
  std::vector<std::string> warnings;
};

struct AggregationOptions {
  std::string id;   // empty: "eq_<first member>"
  std::string bus;  // empty: first member's bus
  // Base-case EMFs and currents per member (system pu), same order as the
  // member list passed in; used for the angle-spread report.
  std::vector<Complex> member_emf;
  std::vector<Complex> member_current;
  double spread_warning_deg = 20.0;
};

// Throws EmptyGroup. A single member comes back unchanged.
EquivalentGenerator aggregate_generators(const std::vector<Generator>& members,
                                         const AggregationOptions& options = {});

}  // namespace dyneq::genagg
