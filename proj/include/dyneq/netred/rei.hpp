#pragma once

#include <string>
#include <vector>

#include "dyneq/model/case.hpp"
#include "dyneq/model/powerflow.hpp"

namespace dyneq::netred {

// Zero-power-balance radial mesh: every member bus i links to a ground node G
// held at 0 V through y_i, and G links to the equivalent bus R through y_R.
struct ReiMesh {
  std::vector<std::string> group;         // generator ids, sorted
  std::vector<std::string> member_buses;  // distinct buses carrying the group
  std::vector<Complex> member_injection;  // pu, per member bus
  std::vector<Complex> member_admittance; // y_i, per member bus
  std::string equivalent_bus;
  std::string ground_node;
  Complex equivalent_admittance{};        // y_R
  Complex equivalent_injection{};         // pu, sum of member injections
  Complex equivalent_voltage{};
  double power_residual = 0.0;            // |S_R - sum S_i| and the mesh losses, pu
  bool degenerate = false;                // single bus: R is that bus, no mesh
};

// Throws ZeroInjectionGroup when the group injects (almost) nothing, and
// InvalidArgument for members outside the external zone.
ReiMesh build_rei(const std::vector<std::string>& group, const PowerSystemCase& c,
                  const BusVoltageSolution& sol, const std::string& equivalent_bus,
                  const std::string& ground_node);

}  // namespace dyneq::netred
