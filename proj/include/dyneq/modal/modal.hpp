#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "dyneq/dynamics/dynamic_system.hpp"
#include "dyneq/model/case.hpp"
#include "dyneq/model/powerflow.hpp"

namespace dyneq::modal {

struct LinearModel {
  Eigen::MatrixXd a;
  std::vector<dynamics::StateLabel> state_labels;
  std::vector<std::string> generator_ids;
  std::vector<Eigen::Index> omega_rows;  // per generator
  // Columns: mechanical power deviation per generator (machine pu).
  Eigen::MatrixXd input_map;
  // Rows: delta_omega and delta_pe per generator, labelled "<gen>.<signal>".
  Eigen::MatrixXd output_map;
  std::vector<std::string> output_labels;
};

LinearModel linearize(const PowerSystemCase& c, const BusVoltageSolution& sol,
                      dynamics::DynamicOptions opt = {});

struct ModalResult {
  Eigen::VectorXcd eigenvalues;
  Eigen::MatrixXcd right_eigenvectors;  // unit-norm columns
  std::vector<double> frequency_hz;
  std::vector<double> damping_ratio;
  std::vector<std::string> generator_ids;
  std::vector<Eigen::Index> omega_rows;

  Eigen::Index size() const { return eigenvalues.size(); }
};

ModalResult eigenanalysis(const LinearModel& model);

// Largest ||A v - lambda v|| / ||v|| over all modes.
double max_eigen_residual(const LinearModel& model, const ModalResult& modal);

enum class ModeStrategy { least_damped, unique };

struct ModeSelector {
  double lo_hz = 0.1;
  double hi_hz = 1.0;
  std::optional<Eigen::Index> mode_id;  // overrides the band
  ModeStrategy strategy = ModeStrategy::least_damped;
};

// Oscillatory modes (Im > 0) in the band, least damped first, ties by lower
// frequency.
std::vector<Eigen::Index> modes_in_band(const ModalResult& modal, double lo_hz, double hi_hz);

// Throws NoModeInBand, or AmbiguousMode under ModeStrategy::unique.
Eigen::Index select_mode(const ModalResult& modal, const ModeSelector& selector);

enum class GroupingScope { external, all };

struct CoherencyGrouping {
  Eigen::Index mode_index = -1;
  std::complex<double> mode;
  std::vector<std::vector<std::string>> groups;  // ids sorted, groups by first id
  double angle_tolerance_deg = 30.0;
  std::map<std::string, double> angle_deg;       // Delta-omega mode-shape angle per generator
};

// Mode-shape angles (degrees, (-180, 180]) of the Delta-omega entries.
std::map<std::string, double> mode_shape_angles(const ModalResult& modal, Eigen::Index mode);

// Single-linkage clustering of angles on the circle. Chains that end up
// wider than the tolerance are split at their widest internal gap until
// every group satisfies it pairwise.
std::vector<std::vector<std::string>> cluster_angles(const std::map<std::string, double>& angles,
                                                     double tolerance_deg);

CoherencyGrouping find_coherent_groups(const ModalResult& modal, const ModeSelector& selector,
                                       const PowerSystemCase& c, double angle_tolerance_deg = 30.0,
                                       GroupingScope scope = GroupingScope::external);

}  // namespace dyneq::modal
