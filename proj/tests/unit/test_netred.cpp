#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "dyneq/model/powerflow.hpp"
#include "dyneq/netred/admittance.hpp"
#include "dyneq/netred/reduce.hpp"
#include "dyneq/netred/rei.hpp"
#include "support.hpp"

using namespace dyneq;
using namespace dyneq::netred;

namespace {

Generator unit(const std::string& id, const std::string& bus, double p) {
  Generator g;
  g.id = id;
  g.bus = bus;
  g.rated_mva = 200.0;
  g.inertia_h = 4.0;
  g.xd_prime = 0.3;
  g.p_gen = p;
  return g;
}

// s (internal, slack) - b (boundary) - e1, e2 (external, one generator each).
PowerSystemCase twin_case() {
  PowerSystemCase c;
  c.slack_bus = "s";
  c.buses = {{"s", 230.0, Zone::internal, {}},
             {"b", 230.0, Zone::boundary, {}},
             {"e1", 230.0, Zone::external, {}},
             {"e2", 230.0, Zone::external, {}}};
  const Complex y = 1.0 / Complex(0.005, 0.05);
  c.branches = {{"sb", "s", "b", y, {}, 1.0},
                {"b1", "b", "e1", y, {}, 1.0},
                {"b2", "b", "e2", y, {}, 1.0}};
  c.generators = {unit("S", "s", 0.0), unit("A", "e1", 80.0), unit("B", "e2", 80.0)};
  c.loads = {{"b", {200.0, 30.0}, {}}};
  validate(c);
  return c;
}

AdmittanceMatrix random_network(std::mt19937_64& rng, int n) {
  std::uniform_real_distribution<double> r(0.001, 0.05), x(0.01, 0.5), sh(0.0, 0.5);
  AdmittanceMatrix y;
  y.y = Eigen::MatrixXcd::Zero(n, n);
  for (int i = 0; i < n; ++i) y.bus_ids.push_back("n" + std::to_string(i));
  auto link = [&](int i, int j) {
    const Complex a = 1.0 / Complex(r(rng), x(rng));
    y.y(i, i) += a;
    y.y(j, j) += a;
    y.y(i, j) -= a;
    y.y(j, i) -= a;
  };
  // Random spanning tree plus a few chords keeps the graph connected.
  for (int i = 1; i < n; ++i) link(i, std::uniform_int_distribution<int>(0, i - 1)(rng));
  for (int k = 0; k < n / 2; ++k) {
    int i = std::uniform_int_distribution<int>(0, n - 1)(rng);
    int j = std::uniform_int_distribution<int>(0, n - 1)(rng);
    if (i != j) link(i, j);
  }
  for (int i = 0; i < n; ++i) y.y(i, i) += Complex(0.01, sh(rng));
  return y;
}

}  // namespace

TEST_CASE("single branch admittance") {
  PowerSystemCase c;
  c.slack_bus = "1";
  c.buses = {{"1", 230.0, Zone::internal, {}}, {"2", 230.0, Zone::internal, {}}};
  const Complex y(1.0, -10.0);
  c.branches = {{"L", "1", "2", y, {}, 1.0}};
  auto m = build_admittance(c);
  CHECK(m.y(0, 0) == y);
  CHECK(m.y(1, 1) == y);
  CHECK(m.y(0, 1) == -y);
  CHECK(m.y(1, 0) == -y);
}

TEST_CASE("no branches leaves only shunts") {
  PowerSystemCase c;
  c.buses = {{"1", 230.0, Zone::internal, Complex(0.0, 0.2)}, {"2", 230.0, Zone::internal, Complex(0.1, 0.0)}};
  auto m = build_admittance(c);
  CHECK(m.y(0, 0) == Complex(0.0, 0.2));
  CHECK(m.y(1, 1) == Complex(0.1, 0.0));
  CHECK(m.y(0, 1) == Complex{});
}

TEST_CASE("Kron elimination of a three-bus chain") {
  const Complex y(0.0, -10.0);
  AdmittanceMatrix m;
  m.bus_ids = {"1", "2", "3"};
  m.y.resize(3, 3);
  m.y << y, -y, 0.0, -y, 2.0 * y, -y, 0.0, -y, y;
  auto red = kron_eliminate(m, {"1", "3"});
  CHECK(std::abs(-red.y(0, 1) - Complex(0.0, -5.0)) < 1e-12);
  CHECK(std::abs(red.y(0, 0) - Complex(0.0, -5.0)) < 1e-12);

  auto same = kron_eliminate(m, {"1", "2", "3"});
  CHECK((same.y - m.y).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("eliminating an isolated bus is singular and names it") {
  AdmittanceMatrix m;
  m.bus_ids = {"1", "2", "iso"};
  m.y = Eigen::MatrixXcd::Zero(3, 3);
  m.y(0, 0) = m.y(1, 1) = Complex(0.0, -10.0);
  m.y(0, 1) = m.y(1, 0) = Complex(0.0, 10.0);
  m.y(0, 0) += 0.1;
  try {
    kron_eliminate(m, {"1", "2"});
    FAIL("expected SingularSubmatrix");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::SingularSubmatrix);
    REQUIRE(!e.details().empty());
    CHECK(e.details().front() == "iso");
  }
}

TEST_CASE("Kron preserves transfer impedances between kept buses") {
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 10; ++trial) {
    const int n = std::uniform_int_distribution<int>(4, 30)(rng);
    auto y = random_network(rng, n);
    std::vector<std::string> keep;
    for (const auto& id : y.bus_ids)
      if (std::bernoulli_distribution(0.4)(rng) || keep.empty()) keep.push_back(id);
    auto red = kron_eliminate(y, keep);
    for (const auto& i : keep)
      for (const auto& j : keep) {
        const Complex a = transfer_impedance(y, i, j), b = transfer_impedance(red, i, j);
        CHECK(std::abs(a - b) <= 1e-10 * std::abs(a));
      }
  }
}

TEST_CASE("degenerate REI keeps the member bus") {
  auto c = twin_case();
  auto sol = solve_powerflow(c);
  auto m = build_rei({"A"}, c, sol, "R", "G");
  CHECK(m.degenerate);
  CHECK(m.equivalent_bus == "e1");
  CHECK(m.equivalent_voltage == sol.voltage_at("e1"));
}

TEST_CASE("identical twins blend to their common voltage") {
  auto c = twin_case();
  auto sol = solve_powerflow(c);
  auto m = build_rei({"B", "A"}, c, sol, "R", "G");
  CHECK(!m.degenerate);
  CHECK(m.group == std::vector<std::string>{"A", "B"});
  CHECK(std::abs(sol.voltage_at("e1") - sol.voltage_at("e2")) < 1e-12);
  CHECK(std::abs(m.equivalent_voltage - sol.voltage_at("e1")) < 1e-12);
  CHECK(std::abs(m.equivalent_injection - 2.0 * m.member_injection[0]) < 1e-12);
  CHECK(m.power_residual <= 1e-10);
}

TEST_CASE("REI refuses groups that inject nothing") {
  auto c = twin_case();
  auto sol = solve_powerflow(c);
  sol.generator_power[1] = Complex(1.0, 0.0);
  sol.generator_power[2] = Complex(-1.0, 0.0);
  CHECK(test::error_kind([&] { build_rei({"A", "B"}, c, sol, "R", "G"); }) ==
        ErrorKind::ZeroInjectionGroup);
  CHECK(test::error_kind([&] { build_rei({"S"}, c, sol, "R", "G"); }) == ErrorKind::InvalidArgument);
}

TEST_CASE("reduction of a case without an external zone is the identity") {
  auto c = test::smib();
  auto out = reduce_network(c, solve_powerflow(c), {});
  CHECK(out.reduced == c);
  CHECK(out.eliminated_buses.empty());
}

TEST_CASE("external load bus matches a hand-built Ward shunt") {
  PowerSystemCase c;
  c.slack_bus = "s";
  c.buses = {{"s", 230.0, Zone::internal, {}},
             {"b", 230.0, Zone::boundary, {}},
             {"e", 230.0, Zone::external, {}}};
  const Complex y1 = 1.0 / Complex(0.01, 0.1), y2 = 1.0 / Complex(0.02, 0.2);
  c.branches = {{"sb", "s", "b", y1, {}, 1.0}, {"be", "b", "e", y2, {}, 1.0}};
  c.generators = {unit("S", "s", 0.0)};
  c.loads = {{"e", {80.0, 20.0}, {}}};
  validate(c);
  auto sol = solve_powerflow(c);
  auto out = reduce_network(c, sol, {});

  const Complex yl = std::conj(Complex(0.8, 0.2)) / std::norm(sol.voltage_at("e"));
  const Complex ward = y2 * yl / (y2 + yl);
  CHECK(out.eliminated_buses == std::vector<std::string>{"e"});
  CHECK(out.equivalent_branches.empty());
  CHECK(std::abs(out.reduced.bus("b").shunt - ward) < 1e-12);
  auto rsol = solve_powerflow(out.reduced);
  CHECK(std::abs(rsol.voltage_at("b") - sol.voltage_at("b")) < 1e-9);
}

TEST_CASE("two-area reduction preserves the base case at the boundary") {
  auto c = test::two_area();
  auto sol = solve_powerflow(c);
  auto out = reduce_network(c, sol, {{"G3", "G4"}});
  REQUIRE(out.meshes.size() == 1);
  CHECK(out.meshes[0].power_residual <= 1e-10);
  REQUIRE(!out.boundary.empty());
  for (const auto& b : out.boundary) {
    CHECK(b.voltage_error <= 1e-6);
    CHECK(b.angle_error <= 1e-6);
  }
  CHECK(out.max_boundary_flow_error <= 1e-6);
  CHECK(out.reduced.buses.size() < c.buses.size());
  CHECK(out.generator_bus.at("G3") == out.meshes[0].equivalent_bus);
  CHECK(out.generator_bus.at("G4") == out.meshes[0].equivalent_bus);

  // Reducing the reduced case again changes nothing.
  auto again = reduce_network(out.reduced, solve_powerflow(out.reduced), {});
  CHECK(again.reduced == out.reduced);
}
