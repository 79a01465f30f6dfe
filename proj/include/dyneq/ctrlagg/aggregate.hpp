#pragma once

#include <string>
#include <utility>
#include <vector>

#include "dyneq/ctrlagg/fit.hpp"
#include "dyneq/ctrlagg/frequency_response.hpp"
#include "dyneq/ctrlagg/signal_relation.hpp"
#include "dyneq/model/case.hpp"

namespace dyneq::ctrlagg {

struct ControllerMember {
  Controller controller;
  Generator generator;
};

struct ControllerAggregationOptions {
  // Inputs of the equivalent. Empty selects the default for the kind:
  // delta_omega for PSS and GOV, {delta_vt, vpss} for AVR.
  std::vector<SignalKind> common_inputs;
  std::vector<double> omega;  // empty selects GridSpec{}
  int num_order = -1;         // -1 selects the default for the kind
  int den_order = -1;
  FitOptions fit;
  std::vector<SignalRelation> user_relations;
  bool reduce_order_on_failure = true;
  std::string id;  // equivalent controller id; empty derives one from the members
};

struct InputFit {
  SignalKind input = SignalKind::delta_omega;
  FrequencyResponse target;
  FitResult fit;
  int num_order = 0;
  int den_order = 0;
};

struct ControllerAggregationResult {
  Controller equivalent;
  std::vector<InputFit> fits;
  std::vector<std::string> log;
};

std::vector<SignalKind> default_common_inputs(ControllerKind k);
std::pair<int, int> default_fit_orders(ControllerKind k);

// Rated-power weighted response of the group on `common_input`, before
// fitting. Paths reading another signal are moved onto `common_input` with
// transform_input and the member's relations (swing relation from its H plus
// `user_relations`). Paths whose signal is itself one of `all_inputs` are
// left to that input.
FrequencyResponse aggregate_target(const std::vector<ControllerMember>& members,
                                   SignalKind common_input,
                                   const std::vector<SignalKind>& all_inputs,
                                   std::span<const double> omega,
                                   const std::vector<SignalRelation>& user_relations);

// Full pipeline for one coherent group: evaluate, transform, aggregate, fit.
ControllerAggregationResult aggregate_controllers(const std::vector<ControllerMember>& members,
                                                  const ControllerAggregationOptions& options = {});

}  // namespace dyneq::ctrlagg
