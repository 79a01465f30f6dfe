#include <cmath>
#include <random>

#include "doctest.h"
#include "dyneq/dynamics/block_realization.hpp"
#include "dyneq/dynamics/dynamic_system.hpp"
#include "dyneq/model/powerflow.hpp"
#include "support.hpp"

using namespace dyneq;
using namespace dyneq::dynamics;
using ctrlagg::RationalTF;
using cd = std::complex<double>;

namespace {

double fd_gap(const PowerSystemCase& c, bool one_axis) {
  auto sol = solve_powerflow(c);
  DynamicSystem sys(c, sol, {one_axis});
  const auto& x = sys.x0();
  return (sys.jacobian(x) - finite_difference_jacobian(sys, x)).cwiseAbs().maxCoeff();
}

PowerSystemCase smib_with_washout() {
  auto c = test::smib();
  Controller pss;
  pss.id = "PSS";
  pss.kind = ControllerKind::pss;
  pss.input_signals = {SignalKind::delta_omega};
  pss.output_signal = SignalKind::vpss;
  pss.diagram = {{Block{BlockType::washout, {{"t", 10.0}}, {}, {}}}};
  c.controllers.push_back(pss);
  c.generators[0].controllers.push_back("PSS");
  validate(c);
  return c;
}

}  // namespace

TEST_CASE("realization reproduces the transfer function") {
  std::vector<RationalTF> tfs{
      RationalTF::constant(3.0),
      RationalTF({1.0}, {1.0, 0.5}),
      RationalTF({0.0, 10.0}, {1.0, 10.0}),
      RationalTF({2.0, 0.3, 0.01}, {1.0, 0.4, 0.05, 0.002}),
      RationalTF({1.0, 1.0}, {0.0, 1.0}),
  };
  for (const auto& tf : tfs) {
    auto ss = realize(tf);
    CHECK(ss.states() == tf.den_degree());
    for (double w : {0.03, 1.0, 17.0}) {
      const cd s(0.0, w);
      CHECK(std::abs(ss.evaluate(s) - tf.evaluate(s)) <= 1e-10 * std::abs(tf.evaluate(s)));
    }
  }
}

TEST_CASE("series composition and chains") {
  RationalTF a({1.0, 0.2}, {1.0, 0.05});
  RationalTF b({0.0, 5.0}, {1.0, 5.0});
  auto ss = series(realize(a), realize(b));
  const cd s(0.0, 2.3);
  CHECK(std::abs(ss.evaluate(s) - a.evaluate(s) * b.evaluate(s)) < 1e-12);

  BlockChain chain{{BlockType::gain, {{"k", 20.0}}, {}, {}},
                   {BlockType::washout, {{"t", 10.0}}, {}, {}},
                   {BlockType::leadlag, {{"t1", 0.05}, {"t2", 0.02}}, {}, {}}};
  auto sc = realize(chain);
  CHECK(sc.states() == 2);
  CHECK(std::abs(sc.evaluate(s) - RationalTF::from_chain(chain).evaluate(s)) < 1e-10);
}

TEST_CASE("multi-input controller has one column per path") {
  auto c = test::two_area();
  const auto& avr = c.controller("AVR1");
  auto ss = realize(avr);
  CHECK(ss.inputs() == Eigen::Index(avr.input_signals.size()));
  const cd s(0.0, 4.0);
  for (std::size_t p = 0; p < avr.diagram.size(); ++p)
    CHECK(std::abs(ss.evaluate(s, Eigen::Index(p)) -
                   RationalTF::from_chain(avr.diagram[p]).evaluate(s)) < 1e-9);
}

TEST_CASE("operating point is an equilibrium") {
  for (bool one_axis : {false, true}) {
    auto c = test::two_area();
    DynamicSystem sys(c, solve_powerflow(c), {one_axis});
    CHECK(sys.f(sys.x0()).cwiseAbs().maxCoeff() <= 1e-9);
    auto snap = sys.evaluate(sys.x0());
    CHECK(std::abs(snap.balance_residual) <= 1e-8);
  }
}

TEST_CASE("analytic Jacobian matches finite differences") {
  CHECK(fd_gap(test::smib(), false) <= 1e-5);
  CHECK(fd_gap(smib_with_washout(), false) <= 1e-5);
  CHECK(fd_gap(test::two_area(), false) <= 1e-5);
  CHECK(fd_gap(test::two_area(), true) <= 1e-5);
}

TEST_CASE("Jacobian away from the operating point") {
  auto c = test::two_area();
  DynamicSystem sys(c, solve_powerflow(c), {true});
  std::mt19937_64 rng(3);
  std::normal_distribution<double> n(0.0, 0.02);
  Eigen::VectorXd x = sys.x0();
  for (Eigen::Index i = 0; i < x.size(); ++i) x[i] += n(rng);
  CHECK((sys.jacobian(x) - finite_difference_jacobian(sys, x)).cwiseAbs().maxCoeff() <= 1e-5);
}

TEST_CASE("a washout block adds exactly one state") {
  auto plain = test::smib();
  auto with = smib_with_washout();
  DynamicSystem a(plain, solve_powerflow(plain));
  DynamicSystem b(with, solve_powerflow(with));
  CHECK(b.size() == a.size() + 1);
  CHECK(a.size() == 2);
  CHECK(b.labels().back() == StateLabel{"PSS", "x0"});
}

TEST_CASE("bus shunt changes move the electrical power") {
  auto c = test::smib();
  DynamicSystem sys(c, solve_powerflow(c));
  const double pe0 = sys.evaluate(sys.x0()).pe[0];
  sys.set_network({{{"gen", Complex(0.0, -1e4)}}, {}});
  CHECK(std::abs(sys.evaluate(sys.x0()).pe[0]) < 1e-3 * pe0);
  sys.set_network({});
  CHECK(sys.evaluate(sys.x0()).pe[0] == doctest::Approx(pe0).epsilon(1e-12));
}
