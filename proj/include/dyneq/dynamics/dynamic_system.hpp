#pragma once

#include <array>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "dyneq/dynamics/block_realization.hpp"
#include "dyneq/model/case.hpp"
#include "dyneq/model/powerflow.hpp"

namespace dyneq::dynamics {

struct DynamicOptions {
  // One-axis flux decay for generators that carry xd and tdo_prime; the rest
  // stay classical.
  bool one_axis = false;
};

struct StateLabel {
  std::string owner;  // generator or controller id
  std::string name;   // delta, delta_omega, eq_prime, x0, x1, ...

  bool operator==(const StateLabel&) const = default;
};

// Alterations applied on top of the base-case network.
struct NetworkChange {
  std::vector<std::pair<std::string, Complex>> bus_shunts;  // bus id, added admittance (pu)
  std::vector<std::string> tripped_branches;

  bool operator==(const NetworkChange&) const = default;
};

inline constexpr std::size_t kSignalCount = 7;

struct Snapshot {
  Eigen::VectorXd f;
  std::vector<Complex> emf;               // per generator, system pu
  std::vector<Complex> current;           // per generator, system pu
  std::vector<double> pe;                 // per generator, system pu
  std::vector<double> vt;                 // per generator terminal magnitude
  std::vector<std::array<double, kSignalCount>> signals;  // per generator, by SignalKind
  std::vector<double> controller_output;  // per controller, case order
  Eigen::VectorXcd bus_voltage;           // case bus order
  double balance_residual = 0.0;          // sum of Pe minus network consumption, pu
};

// Machines and controllers around an algebraic network. Loads are constant
// admittances at the base-case voltage, machines are EMFs behind the
// transient reactance, and a slack bus without a generator is an infinite
// bus held at its solved voltage.
class DynamicSystem {
 public:
  DynamicSystem(const PowerSystemCase& c, const BusVoltageSolution& sol, DynamicOptions opt = {});

  Eigen::Index size() const { return n_; }
  const std::vector<StateLabel>& labels() const { return labels_; }
  const Eigen::VectorXd& x0() const { return x0_; }
  const PowerSystemCase& case_data() const { return case_; }
  const DynamicOptions& options() const { return opt_; }

  Eigen::Index delta_index(std::size_t g) const { return machines_[g].offset; }
  Eigen::Index omega_index(std::size_t g) const { return machines_[g].offset + 1; }
  // -1 for classical machines.
  Eigen::Index eq_index(std::size_t g) const {
    return machines_[g].one_axis ? machines_[g].offset + 2 : -1;
  }
  Eigen::Index controller_offset(std::size_t c) const { return controllers_[c].offset; }
  bool has_infinite_bus() const { return inf_bus_ >= 0; }

  // Replace the active network alterations (relative to the base case).
  void set_network(const NetworkChange& change);
  const NetworkChange& network() const { return change_; }

  Eigen::VectorXd f(const Eigen::VectorXd& x) const;
  Snapshot evaluate(const Eigen::VectorXd& x) const;
  void evaluate(const Eigen::VectorXd& x, Snapshot& out) const;  // reuses out's storage
  Eigen::MatrixXd jacobian(const Eigen::VectorXd& x) const;

  // d(signal)/dx for one generator signal (row vector, length size()).
  Eigen::RowVectorXd signal_gradient(const Eigen::VectorXd& x, std::size_t g, SignalKind s) const;

 private:
  struct Machine {
    std::size_t bus = 0;
    Eigen::Index offset = 0;
    bool one_axis = false;
    double x_sys = 0.0;   // transient reactance, system base
    double to_mach = 1.0; // system pu power -> machine pu
    double h = 0.0, d = 0.0;
    double xd_diff = 0.0, tdo = 1.0;  // machine pu
    double e0 = 0.0;      // classical EMF magnitude
    double pm0 = 0.0, pe0 = 0.0, vt0 = 0.0, efd0 = 0.0;
  };
  struct Ctl {
    std::size_t index = 0;  // case controller index
    std::size_t gen = 0;
    StateSpace ss;
    Eigen::Index offset = 0;
    std::vector<SignalKind> inputs;
    SignalKind output = SignalKind::vpss;
  };
  struct Network {
    Eigen::MatrixXcd y_net;  // with loads and alterations
    Eigen::VectorXcd v0;     // bus voltages with every EMF at zero
    Eigen::MatrixXcd cmat;   // dV/dE per generator
  };
  struct Core;  // per-evaluation intermediate values

  void build_network();
  void compute(const Eigen::VectorXd& x, Core& core) const;
  void signal_rows(const Eigen::VectorXd& x, const Core& core,
                   std::vector<std::array<Eigen::RowVectorXd, kSignalCount>>& rows,
                   Eigen::MatrixXd* jac) const;

  PowerSystemCase case_;
  BusVoltageSolution sol_;
  DynamicOptions opt_;
  std::vector<Machine> machines_;
  std::vector<Ctl> controllers_;  // stage order
  std::vector<StateLabel> labels_;
  Eigen::Index n_ = 0;
  Eigen::VectorXd x0_;
  long inf_bus_ = -1;
  double omega_s_ = 0.0;
  Eigen::MatrixXcd y_base_;
  NetworkChange change_;
  Network net_;
};

// Central-difference Jacobian of sys.f, used to cross-check the analytic one.
Eigen::MatrixXd finite_difference_jacobian(const DynamicSystem& sys, const Eigen::VectorXd& x,
                                           double step = 1e-6);

}  // namespace dyneq::dynamics
