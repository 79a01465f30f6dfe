#pragma once

#include <map>
#include <string>
#include <vector>

#include "dyneq/model/case.hpp"
#include "dyneq/model/powerflow.hpp"
#include "dyneq/netred/rei.hpp"

namespace dyneq::netred {

struct BoundaryCheck {
  std::string bus;
  Complex full_voltage{};
  Complex reduced_voltage{};
  double voltage_error = 0.0;  // |V_full - V_red|, pu
  double angle_error = 0.0;    // rad
};

struct NetworkReduction {
  PowerSystemCase reduced;
  std::vector<ReiMesh> meshes;
  std::vector<std::string> eliminated_buses;
  std::vector<std::string> equivalent_branches;
  std::map<std::string, std::string> generator_bus;  // grouped generator -> equivalent bus
  std::vector<BoundaryCheck> boundary;
  double max_boundary_flow_error = 0.0;  // pu, preserved branches at boundary buses
  std::vector<std::string> log;
};

// REI meshes per group, then Kron elimination of every external bus that is
// not an equivalent bus. Generators of each group move to its equivalent bus
// (still separate; genagg merges them). Internal and boundary buses, their
// loads and branches among kept buses are left as they are.
NetworkReduction reduce_network(const PowerSystemCase& c, const BusVoltageSolution& sol,
                                const std::vector<std::vector<std::string>>& groups);

}  // namespace dyneq::netred
