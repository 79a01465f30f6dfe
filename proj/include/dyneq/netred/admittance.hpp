#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "dyneq/model/case.hpp"
#include "dyneq/model/powerflow.hpp"

namespace dyneq::netred {

struct AdmittanceMatrix {
  Eigen::MatrixXcd y;
  std::vector<std::string> bus_ids;  // row order

  std::optional<Eigen::Index> index(const std::string& id) const;
};

// Branches, taps, bus shunts and every load as an admittance. Constant-power
// loads are converted at the solved voltage when `sol` is given, at 1 pu
// otherwise.
AdmittanceMatrix build_admittance(const PowerSystemCase& c, const BusVoltageSolution* sol = nullptr);

// Schur complement onto `keep` (rows in the order of `keep`). Throws
// SingularSubmatrix naming the buses in the null space of Y_ee.
AdmittanceMatrix kron_eliminate(const AdmittanceMatrix& y, const std::vector<std::string>& keep);

// Driving-point / transfer impedance Z_ij = (Y^-1)_ij.
Complex transfer_impedance(const AdmittanceMatrix& y, const std::string& i, const std::string& j);

}  // namespace dyneq::netred
