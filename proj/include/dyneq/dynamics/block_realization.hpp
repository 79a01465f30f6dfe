#pragma once

#include <Eigen/Dense>

#include "dyneq/ctrlagg/rational.hpp"
#include "dyneq/model/case.hpp"

namespace dyneq::dynamics {

// x' = A x + B u, y = C x + D u with a single output row.
struct StateSpace {
  Eigen::MatrixXd a;
  Eigen::MatrixXd b;
  Eigen::MatrixXd c;
  Eigen::MatrixXd d;

  Eigen::Index states() const { return a.rows(); }
  Eigen::Index inputs() const { return b.cols(); }
  std::complex<double> evaluate(std::complex<double> s, Eigen::Index input = 0) const;
};

// Controllable canonical form of a proper transfer function.
StateSpace realize(const ctrlagg::RationalTF& tf);

// `first` feeds `second`.
StateSpace series(const StateSpace& first, const StateSpace& second);

StateSpace realize(const BlockChain& chain);

// One input column per path, path outputs summed.
StateSpace realize(const Controller& ctl);

}  // namespace dyneq::dynamics
