#include "dyneq/ctrlagg/aggregate.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "dyneq/error.hpp"

namespace dyneq::ctrlagg {

std::vector<SignalKind> default_common_inputs(ControllerKind k) {
  if (k == ControllerKind::avr) return {SignalKind::delta_vt, SignalKind::vpss};
  return {SignalKind::delta_omega};
}

std::pair<int, int> default_fit_orders(ControllerKind k) {
  return k == ControllerKind::gov ? std::pair{2, 3} : std::pair{3, 4};
}

namespace {

bool contains(const std::vector<SignalKind>& v, SignalKind s) {
  return std::find(v.begin(), v.end(), s) != v.end();
}

// Common input a path signal is expressed on: itself when it is one of the
// inputs, otherwise the first input with a relation chain to it.
std::optional<SignalKind> route(SignalKind signal, const std::vector<SignalKind>& inputs,
                                const std::vector<SignalRelation>& relations,
                                std::span<const double> omega) {
  if (contains(inputs, signal)) return signal;
  for (SignalKind c : inputs) {
    try {
      resolve_relation(c, signal, relations, omega);
      return c;
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::MissingRelation) throw;
    }
  }
  return std::nullopt;
}

std::vector<SignalRelation> member_relations(const Generator& g,
                                             const std::vector<SignalRelation>& user) {
  std::vector<SignalRelation> out = user;
  out.push_back(swing_relation(g.inertia_h));
  return out;
}

}  // namespace

FrequencyResponse aggregate_target(const std::vector<ControllerMember>& members,
                                   SignalKind common_input,
                                   const std::vector<SignalKind>& all_inputs,
                                   std::span<const double> omega,
                                   const std::vector<SignalRelation>& user_relations) {
  if (members.empty()) throw Error(ErrorKind::EmptyList, "no controllers to aggregate");
  std::vector<std::pair<FrequencyResponse, double>> entries;
  for (const auto& m : members) {
    const auto relations = member_relations(m.generator, user_relations);
    FrequencyResponse sum{{omega.begin(), omega.end()},
                          std::vector<std::complex<double>>(omega.size()), m.controller.id};
    for (std::size_t p = 0; p < m.controller.input_signals.size(); ++p) {
      const SignalKind sig = m.controller.input_signals[p];
      const auto target = route(sig, all_inputs, relations, omega);
      if (!target)
        throw Error(ErrorKind::MissingRelation,
                    "controller " + m.controller.id + ": no relation from " +
                        std::string(to_string(all_inputs.front())) + " to " +
                        std::string(to_string(sig)));
      if (*target != common_input) continue;
      auto path = evaluate_fr(m.controller.diagram[p], omega,
                              m.controller.id + ":" + std::string(to_string(sig)));
      if (sig != common_input)
        path = transform_input(path, resolve_relation(common_input, sig, relations, omega));
      sum = add(sum, path);
    }
    sum.source_label = m.controller.id;
    entries.emplace_back(std::move(sum), m.generator.rated_mva);
  }
  return aggregate_frequency_responses(entries);
}

ControllerAggregationResult aggregate_controllers(const std::vector<ControllerMember>& members,
                                                  const ControllerAggregationOptions& options) {
  if (members.empty()) throw Error(ErrorKind::EmptyList, "no controllers to aggregate");
  const ControllerKind kind = members.front().controller.kind;
  for (const auto& m : members)
    if (m.controller.kind != kind)
      throw Error(ErrorKind::InvalidArgument,
                  "cannot aggregate " + std::string(to_string(m.controller.kind)) + " " +
                      m.controller.id + " with " + std::string(to_string(kind)) + " controllers");

  // Member order must not change the result.
  std::vector<ControllerMember> sorted = members;
  std::sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) {
    return a.generator.id != b.generator.id ? a.generator.id < b.generator.id
                                            : a.controller.id < b.controller.id;
  });

  const auto inputs =
      options.common_inputs.empty() ? default_common_inputs(kind) : options.common_inputs;
  const auto omega = options.omega.empty() ? GridSpec{}.omega() : options.omega;
  auto [num_order, den_order] = default_fit_orders(kind);
  if (options.num_order >= 0) num_order = options.num_order;
  if (options.den_order >= 0) den_order = options.den_order;

  ControllerAggregationResult result;
  Controller& eq = result.equivalent;
  eq.kind = kind;
  eq.output_signal = sorted.front().controller.output_signal;
  if (!options.id.empty()) {
    eq.id = options.id;
  } else {
    eq.id = "eq_" + std::string(to_string(kind));
    for (const auto& m : sorted) eq.id += "_" + m.controller.id;
  }

  for (SignalKind input : inputs) {
    auto target = aggregate_target(sorted, input, inputs, omega, options.user_relations);
    const bool all_zero = std::all_of(target.samples.begin(), target.samples.end(),
                                      [](const auto& v) { return v == std::complex<double>{}; });
    if (all_zero) {
      result.log.push_back("input " + std::string(to_string(input)) + ": no member path, skipped");
      continue;
    }
    int n = num_order, d = den_order;
    for (;;) {
      try {
        auto fit = fit_rational(target, n, d, options.fit);
        std::ostringstream msg;
        msg << "input " << to_string(input) << ": fitted orders " << n << "/" << d
            << ", max rel error " << fit.report.max_rel_error << ", rms "
            << fit.report.rms_rel_error << ", iterations " << fit.report.iterations;
        result.log.push_back(msg.str());
        Block b;
        b.type = BlockType::tf;
        b.num = fit.tf.num();
        b.den = fit.tf.den();
        eq.input_signals.push_back(input);
        eq.diagram.push_back({b});
        result.fits.push_back({input, std::move(target), std::move(fit), n, d});
        break;
      } catch (const Error& e) {
        const bool retry = options.reduce_order_on_failure && d > 0 &&
                           (e.kind() == ErrorKind::RankDeficient ||
                            e.kind() == ErrorKind::UnstableFit);
        if (!retry) throw;
        result.log.push_back("input " + std::string(to_string(input)) + ": orders " +
                             std::to_string(n) + "/" + std::to_string(d) + " rejected (" +
                             std::string(to_string(e.kind())) + "), lowering");
        --d;
        n = std::min(n, d);
      }
    }
  }
  if (eq.input_signals.empty())
    throw Error(ErrorKind::EmptyList, "equivalent " + eq.id + " has no input paths");
  return result;
}

}  // namespace dyneq::ctrlagg
