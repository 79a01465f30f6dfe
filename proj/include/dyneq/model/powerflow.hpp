#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "dyneq/model/case.hpp"

namespace dyneq {

struct BranchFlow {
  std::string branch_id;
  Complex from_end{};  // pu, power leaving the from bus into the branch
  Complex to_end{};    // pu, power leaving the to bus into the branch
};

struct BusVoltageSolution {
  std::vector<std::string> bus_ids;       // case bus order
  std::vector<Complex> voltage;           // pu
  std::vector<BranchFlow> branch_flows;   // case branch order
  std::vector<Complex> generator_power;   // pu system base, case generator order
  int iterations = 0;
  double max_mismatch = 0.0;

  Complex voltage_at(const std::string& bus_id) const;
};

// Branch two-port stamp with the tap on the from side.
struct BranchStamp {
  Complex ff, ft, tf, tt;
};
BranchStamp branch_stamp(const Branch& br);

// Bus admittance matrix in case bus order: branches, bus shunts and, when
// asked, the constant-impedance part of loads.
Eigen::MatrixXcd assemble_ybus(const PowerSystemCase& c, bool include_impedance_loads);

// Constant-power part of every load at the bus, pu on system base.
Eigen::VectorXcd constant_power_load(const PowerSystemCase& c);
Eigen::VectorXcd impedance_load_admittance(const PowerSystemCase& c);

// Full-Newton polar power flow from a flat start. Buses with generators are
// PV (voltage at the generator set-point), the slack bus holds angle zero.
// Throws Divergence after 50 iterations.
BusVoltageSolution solve_powerflow(const PowerSystemCase& c);

// Per-bus complex power mismatch of `sol` against the case data, pu.
double powerflow_mismatch(const PowerSystemCase& c, const BusVoltageSolution& sol);

}  // namespace dyneq
