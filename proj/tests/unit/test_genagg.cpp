#include <algorithm>
#include <cmath>
#include <random>

#include "doctest.h"
#include "dyneq/genagg/genagg.hpp"
#include "support.hpp"

using namespace dyneq;
using namespace dyneq::genagg;

namespace {

Generator unit(const std::string& id, double h, double mva, double xd) {
  Generator g;
  g.id = id;
  g.bus = "x";
  g.inertia_h = h;
  g.rated_mva = mva;
  g.xd_prime = xd;
  g.damping_d = 1.0;
  g.p_gen = 0.5 * mva;
  return g;
}

}  // namespace

TEST_CASE("one member comes back unchanged") {
  auto g = unit("G", 3.0, 100.0, 0.3);
  g.xd = 1.8;
  g.tdo_prime = 8.0;
  g.controllers = {"PSS"};
  auto eq = aggregate_generators({g});
  CHECK(eq.generator == g);
  CHECK(eq.members == std::vector<std::string>{"G"});
}

TEST_CASE("two identical units") {
  auto eq = aggregate_generators({unit("A", 3.0, 100.0, 0.3), unit("B", 3.0, 100.0, 0.3)});
  CHECK(eq.generator.rated_mva == doctest::Approx(200.0));
  CHECK(eq.generator.inertia_h == doctest::Approx(3.0));
  CHECK(eq.generator.xd_prime == doctest::Approx(0.3));
  REQUIRE(eq.base_conversion_log.size() == 2);
  CHECK(eq.base_conversion_log[0].xd_prime_common == doctest::Approx(0.6));
  CHECK(eq.generator.p_gen == doctest::Approx(100.0));
}

TEST_CASE("inertia from the kinetic-energy sum") {
  auto eq = aggregate_generators({unit("A", 2.0, 50.0, 0.25), unit("B", 4.0, 150.0, 0.3)});
  CHECK(eq.generator.rated_mva == doctest::Approx(200.0));
  CHECK(eq.generator.inertia_h == doctest::Approx(3.5));
}

TEST_CASE("conservation, identity and order invariance on random groups") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> h(1.0, 9.0), s(20.0, 1000.0), x(0.15, 0.45);
  for (int trial = 0; trial < 25; ++trial) {
    std::vector<Generator> m;
    const int n = 2 + trial % 4;
    for (int k = 0; k < n; ++k) m.push_back(unit("G" + std::to_string(k), h(rng), s(rng), x(rng)));
    auto eq = aggregate_generators(m);

    double ke = 0.0, admittance = 0.0;
    for (const auto& g : m) {
      ke += g.inertia_h * g.rated_mva;
      admittance += 1.0 / (g.xd_prime * eq.generator.rated_mva / g.rated_mva);
    }
    CHECK(std::abs(eq.generator.inertia_h * eq.generator.rated_mva - ke) <= 1e-12 * ke);
    CHECK(std::abs(1.0 / eq.generator.xd_prime - admittance) <= 1e-12 * admittance);

    auto shuffled = m;
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    auto other = aggregate_generators(shuffled);
    CHECK(other.generator.inertia_h == doctest::Approx(eq.generator.inertia_h).epsilon(1e-14));
    CHECK(other.generator.xd_prime == doctest::Approx(eq.generator.xd_prime).epsilon(1e-14));
    CHECK(other.generator.damping_d == doctest::Approx(eq.generator.damping_d).epsilon(1e-14));
    CHECK(other.members == eq.members);
  }
}

TEST_CASE("identical machines keep their per-unit data") {
  std::vector<Generator> m;
  for (int k = 0; k < 4; ++k) {
    auto g = unit("G" + std::to_string(k), 6.5, 900.0, 0.3);
    g.xd = 1.8;
    g.tdo_prime = 8.0;
    m.push_back(g);
  }
  auto eq = aggregate_generators(m);
  CHECK(eq.generator.inertia_h == doctest::Approx(6.5));
  CHECK(eq.generator.xd_prime == doctest::Approx(0.3));
  CHECK(*eq.generator.xd == doctest::Approx(1.8));
  CHECK(*eq.generator.tdo_prime == doctest::Approx(8.0));
  CHECK(eq.generator.damping_d == doctest::Approx(1.0));
}

TEST_CASE("angle spread is reported and warned about") {
  std::vector<Generator> m{unit("A", 3.0, 100.0, 0.3), unit("B", 3.0, 100.0, 0.3)};
  AggregationOptions o;
  o.member_emf = {std::polar(1.1, 0.1), std::polar(1.1, 0.1 + 25.0 * 3.14159265358979 / 180.0)};
  o.member_current = {Complex(0.5, 0.0), Complex(0.5, 0.0)};
  auto eq = aggregate_generators(m, o);
  CHECK(eq.emf_angle_spread_deg == doctest::Approx(25.0).epsilon(1e-6));
  CHECK(!eq.warnings.empty());
  REQUIRE(eq.mean_emf.has_value());

  o.member_emf[1] = std::polar(1.1, 0.15);
  CHECK(aggregate_generators(m, o).warnings.empty());
}

TEST_CASE("empty group") {
  CHECK(test::error_kind([] { aggregate_generators({}); }) == ErrorKind::EmptyGroup);
}
