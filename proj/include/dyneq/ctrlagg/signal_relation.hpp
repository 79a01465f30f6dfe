#pragma once

#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "dyneq/ctrlagg/frequency_response.hpp"
#include "dyneq/ctrlagg/rational.hpp"

namespace dyneq::ctrlagg {

enum class RelationProvenance { swing_analytic, user_supplied, identity };

std::string_view to_string(RelationProvenance p);

// relation(s) = to_signal(s) / from_signal(s). A controller path reading
// `to_signal` is moved onto `from_signal` by transform_input(path, relation).
struct SignalRelation {
  SignalKind from_signal = SignalKind::delta_omega;
  SignalKind to_signal = SignalKind::delta_omega;
  std::optional<RationalTF> tf;
  std::optional<FrequencyResponse> response;  // opaque relation, used when tf is empty
  RelationProvenance provenance = RelationProvenance::identity;

  FrequencyResponse evaluate(std::span<const double> omega) const;
};

SignalRelation identity_relation(SignalKind s);

// dPe/domega = -2Hs at fixed mechanical power. Throws NonpositiveInertia.
SignalRelation swing_relation(double inertia_h);

SignalRelation user_relation(SignalKind from, SignalKind to, RationalTF tf);
SignalRelation user_relation(SignalKind from, SignalKind to, FrequencyResponse fr);

// Composite relation to/from built from a chain of known relations (BFS over
// signals, products along the chain). Identity when from == to. Throws
// MissingRelation naming the pair when no chain exists.
FrequencyResponse resolve_relation(SignalKind from, SignalKind to,
                                   std::span<const SignalRelation> known,
                                   std::span<const double> omega);

}  // namespace dyneq::ctrlagg
