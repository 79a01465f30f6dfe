#include "dyneq/ctrlagg/signal_relation.hpp"

#include <algorithm>
#include <deque>
#include <map>

#include "dyneq/error.hpp"
#include "dyneq/simd/fr_kernels.hpp"

namespace dyneq::ctrlagg {

std::string_view to_string(RelationProvenance p) {
  switch (p) {
    case RelationProvenance::swing_analytic: return "swing_analytic";
    case RelationProvenance::user_supplied: return "user_supplied";
    case RelationProvenance::identity: return "identity";
  }
  return "?";
}

FrequencyResponse SignalRelation::evaluate(std::span<const double> omega) const {
  std::string label = std::string(dyneq::to_string(to_signal)) + "/" +
                      std::string(dyneq::to_string(from_signal));
  if (tf) return evaluate_fr(*tf, omega, label);
  if (response) {
    if (!std::equal(omega.begin(), omega.end(), response->omega.begin(), response->omega.end()))
      throw Error(ErrorKind::GridMismatch, "relation " + label + " sampled on another grid");
    return *response;
  }
  return evaluate_fr(RationalTF::constant(1.0), omega, label);
}

SignalRelation identity_relation(SignalKind s) {
  return {s, s, RationalTF::constant(1.0), std::nullopt, RelationProvenance::identity};
}

SignalRelation swing_relation(double inertia_h) {
  if (!(inertia_h > 0.0))
    throw Error(ErrorKind::NonpositiveInertia,
                "swing relation needs H > 0, got " + std::to_string(inertia_h));
  return {SignalKind::delta_omega, SignalKind::delta_pe,
          RationalTF({0.0, -2.0 * inertia_h}, {1.0}, true), std::nullopt,
          RelationProvenance::swing_analytic};
}

SignalRelation user_relation(SignalKind from, SignalKind to, RationalTF tf) {
  return {from, to, std::move(tf), std::nullopt, RelationProvenance::user_supplied};
}

SignalRelation user_relation(SignalKind from, SignalKind to, FrequencyResponse fr) {
  fr.check();
  return {from, to, std::nullopt, std::move(fr), RelationProvenance::user_supplied};
}

FrequencyResponse resolve_relation(SignalKind from, SignalKind to,
                                   std::span<const SignalRelation> known,
                                   std::span<const double> omega) {
  if (from == to) return identity_relation(from).evaluate(omega);
  // Shortest chain; relations are tried in the order given, so the first
  // matching relation wins at each hop.
  std::map<SignalKind, std::size_t> via;
  std::deque<SignalKind> queue{from};
  std::map<SignalKind, bool> seen{{from, true}};
  while (!queue.empty() && !seen.count(to)) {
    const SignalKind s = queue.front();
    queue.pop_front();
    for (std::size_t i = 0; i < known.size(); ++i) {
      const auto& r = known[i];
      if (r.from_signal != s || seen.count(r.to_signal)) continue;
      seen[r.to_signal] = true;
      via[r.to_signal] = i;
      queue.push_back(r.to_signal);
    }
  }
  if (!seen.count(to))
    throw Error(ErrorKind::MissingRelation, "no signal relation from " +
                                                std::string(dyneq::to_string(from)) + " to " +
                                                std::string(dyneq::to_string(to)));
  std::vector<std::size_t> chain;
  for (SignalKind s = to; s != from; s = known[via[s]].from_signal) chain.push_back(via[s]);
  FrequencyResponse out = known[chain.back()].evaluate(omega);
  const auto& k = simd::active_kernels();
  for (std::size_t i = chain.size() - 1; i-- > 0;) {
    auto part = known[chain[i]].evaluate(omega);
    k.cmul(out.samples.data(), part.samples.data(), out.samples.data(), out.size());
  }
  out.source_label = std::string(dyneq::to_string(to)) + "/" + std::string(dyneq::to_string(from));
  return out;
}

}  // namespace dyneq::ctrlagg
