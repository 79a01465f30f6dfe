#include "dyneq/dynamics/block_realization.hpp"

#include "dyneq/error.hpp"

namespace dyneq::dynamics {

std::complex<double> StateSpace::evaluate(std::complex<double> s, Eigen::Index input) const {
  const Eigen::Index n = states();
  std::complex<double> y = d(0, input);
  if (n == 0) return y;
  Eigen::MatrixXcd m = s * Eigen::MatrixXcd::Identity(n, n) - a.cast<std::complex<double>>();
  Eigen::VectorXcd x = m.partialPivLu().solve(b.col(input).cast<std::complex<double>>());
  return y + (c.cast<std::complex<double>>() * x)(0);
}

StateSpace realize(const ctrlagg::RationalTF& tf) {
  if (!tf.is_proper())
    throw Error(ErrorKind::InvalidArgument, "cannot realize an improper transfer function");
  const int n = tf.den_degree();
  const double lead = tf.den()[std::size_t(n)];
  std::vector<double> alpha(std::size_t(n) + 1), beta(std::size_t(n) + 1, 0.0);
  for (int k = 0; k <= n; ++k) alpha[std::size_t(k)] = tf.den()[std::size_t(k)] / lead;
  for (std::size_t k = 0; k < tf.num().size() && k <= std::size_t(n); ++k)
    beta[k] = tf.num()[k] / lead;

  StateSpace ss;
  ss.a = Eigen::MatrixXd::Zero(n, n);
  ss.b = Eigen::MatrixXd::Zero(n, 1);
  ss.c = Eigen::MatrixXd::Zero(1, n);
  ss.d = Eigen::MatrixXd::Constant(1, 1, beta[std::size_t(n)]);
  for (int i = 0; i + 1 < n; ++i) ss.a(i, i + 1) = 1.0;
  for (int k = 0; k < n; ++k) {
    ss.a(n - 1, k) = -alpha[std::size_t(k)];
    ss.c(0, k) = beta[std::size_t(k)] - beta[std::size_t(n)] * alpha[std::size_t(k)];
  }
  if (n > 0) ss.b(n - 1, 0) = 1.0;
  return ss;
}

StateSpace series(const StateSpace& first, const StateSpace& second) {
  const Eigen::Index n1 = first.states(), n2 = second.states(), m = first.inputs();
  StateSpace out;
  out.a = Eigen::MatrixXd::Zero(n1 + n2, n1 + n2);
  out.a.topLeftCorner(n1, n1) = first.a;
  out.a.bottomRightCorner(n2, n2) = second.a;
  out.a.bottomLeftCorner(n2, n1) = second.b * first.c;
  out.b.resize(n1 + n2, m);
  out.b.topRows(n1) = first.b;
  out.b.bottomRows(n2) = second.b * first.d;
  out.c.resize(1, n1 + n2);
  out.c.leftCols(n1) = second.d * first.c;
  out.c.rightCols(n2) = second.c;
  out.d = second.d * first.d;
  return out;
}

StateSpace realize(const BlockChain& chain) {
  StateSpace out = realize(ctrlagg::RationalTF::constant(1.0));
  for (const auto& b : chain) out = series(out, realize(ctrlagg::RationalTF::from_block(b)));
  return out;
}

StateSpace realize(const Controller& ctl) {
  std::vector<StateSpace> paths;
  Eigen::Index n = 0;
  for (const auto& chain : ctl.diagram) {
    paths.push_back(realize(chain));
    n += paths.back().states();
  }
  const Eigen::Index m = Eigen::Index(paths.size());
  StateSpace out;
  out.a = Eigen::MatrixXd::Zero(n, n);
  out.b = Eigen::MatrixXd::Zero(n, m);
  out.c = Eigen::MatrixXd::Zero(1, n);
  out.d = Eigen::MatrixXd::Zero(1, m);
  Eigen::Index off = 0;
  for (Eigen::Index p = 0; p < m; ++p) {
    const auto& s = paths[std::size_t(p)];
    const Eigen::Index k = s.states();
    out.a.block(off, off, k, k) = s.a;
    out.b.block(off, p, k, 1) = s.b;
    out.c.block(0, off, 1, k) = s.c;
    out.d(0, p) = s.d(0, 0);
    off += k;
  }
  return out;
}

}  // namespace dyneq::dynamics
