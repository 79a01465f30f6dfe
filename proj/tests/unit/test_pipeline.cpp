#include <cstdlib>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

#include "doctest.h"
#include "dyneq/pipeline/commands.hpp"
#include "dyneq/pipeline/config.hpp"
#include "support.hpp"

using namespace dyneq;
using namespace dyneq::pipeline;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  auto p = fs::temp_directory_path() / ("dyneq_test_" + name);
  fs::remove_all(p);
  return p;
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(DYNEQ_CLI) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

ReductionConfig fixture_config() { return load_config(test::data("two_area_config.json")); }

std::size_t count_of(const std::vector<CountRow>& rows, const std::string& item, bool full) {
  for (const auto& r : rows)
    if (r.item == item) return full ? r.full : r.reduced;
  FAIL("missing summary row " << item);
  return 0;
}

}  // namespace

TEST_CASE("flag value parsing") {
  CHECK(parse_band("0.3:0.8") == std::pair{0.3, 0.8});
  CHECK(parse_orders("2:3") == std::pair{2, 3});
  auto g = parse_grid("0.05:5:120:lin");
  CHECK(g.lo_hz == 0.05);
  CHECK(g.hi_hz == 5.0);
  CHECK(g.points == 120);
  CHECK(!g.logarithmic);
  CHECK(test::error_kind([] { parse_band("0.8:0.3"); }) != ErrorKind::Io);
}

TEST_CASE("config round trip") {
  auto cfg = fixture_config();
  CHECK(cfg.case_path == test::data("two_area.json"));
  CHECK(cfg.one_axis);
  REQUIRE(cfg.scenarios.size() == 1);
  auto again = config_from_json(to_json(cfg), fs::path{});
  CHECK(to_json(again) == to_json(cfg));
  CHECK(test::error_kind([] { load_config("/nonexistent/config.json"); }) == ErrorKind::Io);
}

TEST_CASE("two-area reduction collapses area two") {
  auto cfg = fixture_config();
  auto full = load_configured_case(cfg);
  auto m = run_reduction(full, cfg);
  REQUIRE(m.grouping.groups.size() == 1);
  CHECK(m.grouping.groups[0] == std::vector<std::string>{"G3", "G4"});
  REQUIRE(m.generators.size() == 1);
  CHECK(m.generators[0].members == std::vector<std::string>{"G3", "G4"});
  for (const auto* item : {"buses", "branches", "generators", "controllers"})
    CHECK(count_of(m.summary, item, false) < count_of(m.summary, item, true));
  CHECK(m.reduced.generator_index("G1").has_value());
  CHECK(!m.reduced.generator_index("G3").has_value());
  CHECK(m.controllers.size() == 3);

  // Kinetic energy of the group survives aggregation.
  const auto& eq = m.reduced.generator(m.generators[0].generator.id);
  CHECK(eq.inertia_h * eq.rated_mva ==
        doctest::Approx(full.generator("G3").inertia_h * 900.0 + full.generator("G4").inertia_h * 900.0));
}

TEST_CASE("empty external zone leaves the case alone") {
  auto cfg = fixture_config();
  for (const auto& id : {"3", "4", "9", "10", "11"}) cfg.zones[id] = Zone::internal;
  auto full = load_configured_case(cfg);
  auto m = run_reduction(full, cfg);
  CHECK(m.reduced == full);
  CHECK(!m.warnings.empty());
}

TEST_CASE("comparing a model with itself") {
  auto cfg = fixture_config();
  cfg.scenarios[0].t_end = 2.0;
  auto full = load_configured_case(cfg);
  auto r = run_compare(full, full, cfg);
  REQUIRE(r.scenarios.size() == 1);
  CHECK(r.scenarios[0].ok);
  for (const auto& ch : r.scenarios[0].metrics.channels) CHECK(ch.nrmse == 0.0);
  CHECK(r.full_mode.freq_hz == r.reduced_mode.freq_hz);
  CHECK(r.full_mode.damping_pct == r.reduced_mode.damping_pct);
}

TEST_CASE("a scenario the reduced model cannot run fails alone") {
  auto cfg = fixture_config();
  auto full = load_configured_case(cfg);
  auto reduced = run_reduction(full, cfg).reduced;
  Scenario gone{"fault_bus10", {}, 2.0, 0.005};
  sim::Event e;
  e.target = "10";
  e.t_start = 0.5;
  e.duration = 0.1;
  gone.events = {e};
  cfg.scenarios[0].t_end = 2.0;
  cfg.scenarios.insert(cfg.scenarios.begin(), gone);
  auto r = run_compare(full, reduced, cfg);
  REQUIRE(r.scenarios.size() == 2);
  CHECK(!r.scenarios[0].ok);
  CHECK(!r.scenarios[0].error.empty());
  CHECK(r.scenarios[1].ok);
}

TEST_CASE("modes table") {
  auto c = test::two_area();
  auto r = run_modes(c, 0.1, 2.0, false);
  REQUIRE(r.rows.size() >= 3);
  for (std::size_t k = 1; k < r.rows.size(); ++k)
    CHECK(r.modal.damping_ratio[std::size_t(r.rows[k - 1])] <=
          r.modal.damping_ratio[std::size_t(r.rows[k])]);
  auto inter = run_modes(c, 0.3, 0.8, false);
  REQUIRE(!inter.rows.empty());
  CHECK(r.modal.frequency_hz[std::size_t(inter.rows[0])] == doctest::Approx(0.59).epsilon(0.05));

  auto none = run_modes(c, 50.0, 60.0, false);
  CHECK(none.rows.empty());
  CHECK(none.modes_csv == "mode_id,re,im,freq_hz,damping_pct\n");
}

TEST_CASE("two-state case lists its closed-form mode") {
  auto c = test::smib();
  c.generators[0].damping_d = 4.0;
  auto r = run_modes(c, 0.1, 5.0, false);
  REQUIRE(r.rows.size() == 1);
  const auto& a = r.model.a;
  const double tr = a(0, 0) + a(1, 1), det = a(0, 0) * a(1, 1) - a(0, 1) * a(1, 0);
  const std::complex<double> lam(tr / 2.0, std::sqrt(det - tr * tr / 4.0));
  CHECK(std::abs(r.modal.eigenvalues(r.rows[0]) - lam) < 1e-9 * std::abs(lam));
  std::istringstream csv(r.modes_csv);
  std::string header, row, extra;
  std::getline(csv, header);
  std::getline(csv, row);
  CHECK(!row.empty());
  CHECK(!std::getline(csv, extra));
}

TEST_CASE("CLI reduce is deterministic and exits cleanly") {
  auto a = scratch("reduce_a"), b = scratch("reduce_b");
  const std::string cfg = test::data("two_area_config.json").string();
  REQUIRE(run_cli("reduce --config " + cfg + " --out-dir " + a.string()) == 0);
  REQUIRE(run_cli("reduce --config " + cfg + " --out-dir " + b.string()) == 0);
  for (const auto* name : {"reduced_case.json", "provenance.json", "summary.csv"}) {
    CAPTURE(name);
    CHECK(fs::exists(a / name));
    CHECK(slurp(a / name) == slurp(b / name));
  }
  auto reduced = load_case(a / "reduced_case.json");
  CHECK(reduced.generators.size() == 3);
}

TEST_CASE("CLI exit codes") {
  auto out = scratch("exit");
  CHECK(run_cli("reduce --case /nonexistent/case.json --out-dir " + out.string()) == 2);
  CHECK(!fs::exists(out));
  CHECK(run_cli("reduce --config /nonexistent/config.json --out-dir " + out.string()) == 2);
  CHECK(!fs::exists(out));
  CHECK(run_cli("frobnicate") == 2);

  // Well-formed input, but no mode in the band to group on.
  CHECK(run_cli("reduce --case " + test::data("two_area.json").string() + " --band 20:30 --out-dir " +
                out.string()) == 1);
  CHECK(!fs::exists(out));
}

TEST_CASE("CLI modes, fit, simulate and compare write their files") {
  auto out = scratch("cli_all");
  const std::string c = test::data("two_area.json").string();
  CHECK(run_cli("modes --case " + c + " --band 0.3:0.8 --out-dir " + out.string()) == 0);
  CHECK(fs::exists(out / "modes.csv"));
  CHECK(fs::exists(out / "mode_shape.csv"));

  CHECK(run_cli("fit --case " + c + " --controllers PSS3,PSS4 --orders 3:3 --out-dir " + out.string()) == 0);
  CHECK(fs::exists(out / "equivalent_controller.json"));
  CHECK(slurp(out / "fr_comparison.csv").rfind("omega,target_re,target_im,fit_re,fit_im,rel_error", 0) == 0);

  CHECK(run_cli("simulate --case " + c + " --fault 8:0.5:0.1 --t-end 1 --out-dir " + out.string()) == 0);
  auto traj = sim::read_csv(out / "trajectory_fault_8.csv");
  CHECK(traj.has("G2.p_e"));

  const std::string cfg = test::data("two_area_config.json").string();
  REQUIRE(run_cli("reduce --config " + cfg + " --out-dir " + out.string()) == 0);
  CHECK(run_cli("compare --config " + cfg + " --reduced " + (out / "reduced_case.json").string() +
                " --t-end 2 --out-dir " + out.string()) == 0);
  CHECK(fs::exists(out / "metrics.json"));
  CHECK(fs::exists(out / "modal_table.csv"));
  CHECK(fs::exists(out / "timings.log"));
  fs::remove_all(out);
}
