#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "dyneq/dynamics/dynamic_system.hpp"
#include "dyneq/model/case.hpp"
#include "dyneq/sim/trajectory.hpp"

namespace dyneq::sim {

enum class EventKind { three_phase_fault, branch_trip, load_step };

std::string_view to_string(EventKind k);
EventKind event_kind_from_string(std::string_view s);

struct Event {
  EventKind kind = EventKind::three_phase_fault;
  std::string target;  // bus id (fault, load step) or branch id (trip)
  double t_start = 0.0;
  // Faults: required > 0. Trips and load steps: 0 means permanent.
  double duration = 0.0;
  Complex fault_admittance{0.0, -1e4};  // pu
  Complex load_delta{};                 // MW + j MVAr at the pre-event voltage

  bool operator==(const Event&) const = default;
};

nlohmann::json to_json(const Event& e);
Event event_from_json(const nlohmann::json& j, const std::string& locus);

struct SimOptions {
  double t_end = 10.0;
  double dt = 0.005;
  dynamics::DynamicOptions dynamics;
  int max_newton = 20;
  double newton_tol = 1e-10;
  double blowup = 1e6;
  // Added to the operating point before the first step; empty for none.
  Eigen::VectorXd initial_offset;
};

// Implicit trapezoidal rule with a fixed step; events snap to the step grid.
// Channels: <gen>.delta, <gen>.delta_omega, <gen>.p_e (system pu), <gen>.v_t,
// <gen>.eq_prime (one-axis only), and <controller>.<output signal>.
Trajectory simulate(const PowerSystemCase& c, const std::vector<Event>& events,
                    const SimOptions& options = {});

// Same, from an already built system (its network alterations are reset).
Trajectory simulate(dynamics::DynamicSystem& sys, const std::vector<Event>& events,
                    const SimOptions& options, const BusVoltageSolution& sol);

}  // namespace dyneq::sim
