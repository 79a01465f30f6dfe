#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "dyneq/error.hpp"
#include "dyneq/pipeline/commands.hpp"

namespace fs = std::filesystem;
using namespace dyneq;

namespace {

struct Flags {
  std::string case_path, config_path, out_dir, band, orders, grid, reduced_path, faults_spec;
  std::vector<std::string> controllers;
  double angle_tol = -1.0, dt = -1.0, t_end = -1.0;
  bool one_axis = false;
};

// Config file first, then command-line flags on top.
pipeline::ReductionConfig build_config(const Flags& f) {
  pipeline::ReductionConfig cfg;
  if (!f.config_path.empty()) {
    if (!fs::exists(f.config_path))
      throw Error(ErrorKind::Io, "config file not found: " + f.config_path);
    cfg = pipeline::load_config(f.config_path);
  }
  if (!f.case_path.empty()) cfg.case_path = f.case_path;
  if (cfg.case_path.empty()) throw Error(ErrorKind::Io, "no case given (--case or config case_path)");
  if (!f.out_dir.empty()) cfg.out_dir = f.out_dir;
  if (!f.band.empty()) std::tie(cfg.band_lo_hz, cfg.band_hi_hz) = pipeline::parse_band(f.band);
  if (f.angle_tol >= 0.0) cfg.angle_tolerance_deg = f.angle_tol;
  if (!f.orders.empty()) {
    const auto o = pipeline::parse_orders(f.orders);
    for (auto k : {ControllerKind::pss, ControllerKind::avr, ControllerKind::gov}) cfg.orders[k] = o;
  }
  if (!f.grid.empty()) cfg.grid = pipeline::parse_grid(f.grid);
  if (f.one_axis) cfg.one_axis = true;
  if (!f.faults_spec.empty()) {
    // BUS:T_START:DURATION
    const auto first = f.faults_spec.find(':');
    const auto second = f.faults_spec.find(':', first == std::string::npos ? first : first + 1);
    if (first == std::string::npos || second == std::string::npos)
      throw Error(ErrorKind::InvalidArgument, "--fault expects BUS:T_START:DURATION");
    sim::Event e;
    e.target = f.faults_spec.substr(0, first);
    try {
      e.t_start = std::stod(f.faults_spec.substr(first + 1, second - first - 1));
      e.duration = std::stod(f.faults_spec.substr(second + 1));
    } catch (const std::exception&) {
      throw Error(ErrorKind::InvalidArgument, "--fault expects BUS:T_START:DURATION");
    }
    cfg.scenarios = {{"fault_" + e.target, {e}, 10.0, 0.005}};
  }
  for (auto& s : cfg.scenarios) {
    if (f.dt > 0.0) s.dt = f.dt;
    if (f.t_end > 0.0) s.t_end = f.t_end;
  }
  return cfg;
}

int exit_code(const Error& e) {
  switch (e.kind()) {
    case ErrorKind::Io:
    case ErrorKind::Parse: return 2;
    default: return 1;
  }
}

void print_warnings(const std::vector<std::string>& w) {
  for (const auto& s : w) std::cerr << "warning: " << s << '\n';
}

int cmd_reduce(const Flags& f) {
  const auto cfg = build_config(f);
  const auto full = pipeline::load_configured_case(cfg);
  const auto m = pipeline::run_reduction(full, cfg);
  print_warnings(m.warnings);
  pipeline::write_text(cfg.out_dir, "reduced_case.json", serialize_case(m.reduced));
  pipeline::write_text(cfg.out_dir, "provenance.json", m.provenance.dump(2) + "\n");
  pipeline::write_text(cfg.out_dir, "summary.csv", pipeline::summary_csv(m.summary));
  std::cout << pipeline::summary_csv(m.summary);
  return 0;
}

int cmd_modes(const Flags& f) {
  const auto cfg = build_config(f);
  const auto c = pipeline::load_configured_case(cfg);
  const auto r = pipeline::run_modes(c, cfg.band_lo_hz, cfg.band_hi_hz, cfg.one_axis);
  if (r.rows.empty()) print_warnings({"no oscillatory mode in the band"});
  pipeline::write_text(cfg.out_dir, "modes.csv", r.modes_csv);
  pipeline::write_text(cfg.out_dir, "mode_shape.csv", r.shapes_csv);
  std::cout << r.modes_csv;
  return 0;
}

int cmd_fit(const Flags& f) {
  const auto cfg = build_config(f);
  const auto c = pipeline::load_configured_case(cfg);
  auto ids = f.controllers;
  if (ids.empty())
    throw Error(ErrorKind::InvalidArgument, "fit needs --controllers ID[,ID...]");
  const auto r = pipeline::run_fit(c, ids, cfg);
  for (const auto& l : r.aggregation.log) std::cerr << l << '\n';
  pipeline::write_text(cfg.out_dir, "equivalent_controller.json", r.controller_json.dump(2) + "\n");
  for (const auto& [input, csv] : r.comparison_csv) {
    const std::string name = r.comparison_csv.size() == 1
                                 ? "fr_comparison.csv"
                                 : "fr_comparison_" + std::string(to_string(input)) + ".csv";
    pipeline::write_text(cfg.out_dir, name, csv);
  }
  std::cout << r.controller_json.dump(2) << '\n';
  return 0;
}

int cmd_simulate(const Flags& f) {
  auto cfg = build_config(f);
  const auto c = pipeline::load_configured_case(cfg);
  if (cfg.scenarios.empty()) cfg.scenarios.push_back({"steady", {}, f.t_end > 0 ? f.t_end : 10.0,
                                                      f.dt > 0 ? f.dt : 0.005});
  for (const auto& sc : cfg.scenarios) {
    sim::SimOptions opt;
    opt.t_end = sc.t_end;
    opt.dt = sc.dt;
    opt.dynamics.one_axis = cfg.one_axis;
    const auto traj = sim::simulate(c, sc.events, opt);
    fs::create_directories(cfg.out_dir);
    sim::write_csv(traj, cfg.out_dir / ("trajectory_" + sc.name + ".csv"));
    std::cout << sc.name << ": " << traj.time.size() << " samples"
              << (traj.unstable ? ", unstable at t = " + std::to_string(traj.unstable_time) : "")
              << '\n';
  }
  return 0;
}

int cmd_compare(const Flags& f) {
  const auto cfg = build_config(f);
  if (f.reduced_path.empty()) throw Error(ErrorKind::Io, "compare needs --reduced");
  if (!fs::exists(f.reduced_path)) throw Error(ErrorKind::Io, "reduced case not found: " + f.reduced_path);
  const auto full = pipeline::load_configured_case(cfg);
  const auto reduced = load_case(f.reduced_path);
  const auto r = pipeline::run_compare(full, reduced, cfg);
  pipeline::write_text(cfg.out_dir, "metrics.json", r.metrics_json.dump(2) + "\n");
  pipeline::write_text(cfg.out_dir, "modal_table.csv", r.modal_table_csv);
  pipeline::write_text(cfg.out_dir, "timings.log", r.timings_log);
  std::cout << r.modal_table_csv << r.timings_log;
  bool all_ok = true;
  for (const auto& s : r.scenarios)
    if (!s.ok) {
      std::cerr << "scenario " << s.name << " failed: " << s.error << '\n';
      all_ok = false;
    }
  return all_ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Dynamic equivalent reduction of power-system models"};
  app.require_subcommand(1);
  Flags f;

  auto common = [&](CLI::App* sub) {
    sub->add_option("--case", f.case_path, "Case file (JSON)");
    sub->add_option("--config", f.config_path, "Reduction config (JSON)");
    sub->add_option("--out-dir", f.out_dir, "Output directory");
    sub->add_option("--band", f.band, "Mode band lo:hi in Hz");
    sub->add_flag("--one-axis", f.one_axis, "One-axis machines where data allows");
  };
  auto* reduce = app.add_subcommand("reduce", "Build the reduced equivalent");
  common(reduce);
  reduce->add_option("--angle-tol", f.angle_tol, "Coherency angle tolerance (deg)");
  reduce->add_option("--orders", f.orders, "Fit orders n:d for every controller kind");
  reduce->add_option("--grid", f.grid, "Frequency grid lo:hi:n:log|lin (Hz)");

  auto* modes = app.add_subcommand("modes", "List modes in a band");
  common(modes);

  auto* fit = app.add_subcommand("fit", "Aggregate and fit controllers");
  common(fit);
  fit->add_option("--controllers", f.controllers, "Controller ids")->delimiter(',');
  fit->add_option("--orders", f.orders, "Fit orders n:d");
  fit->add_option("--grid", f.grid, "Frequency grid lo:hi:n:log|lin (Hz)");

  auto* simulate = app.add_subcommand("simulate", "Time-domain simulation");
  common(simulate);
  simulate->add_option("--dt", f.dt, "Step (s)");
  simulate->add_option("--t-end", f.t_end, "End time (s)");
  simulate->add_option("--fault", f.faults_spec, "Bolted fault BUS:T_START:DURATION");

  auto* compare = app.add_subcommand("compare", "Compare full and reduced models");
  common(compare);
  compare->add_option("--reduced", f.reduced_path, "Reduced case file");
  compare->add_option("--dt", f.dt, "Step (s)");
  compare->add_option("--t-end", f.t_end, "End time (s)");
  compare->add_option("--fault", f.faults_spec, "Bolted fault BUS:T_START:DURATION");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (*reduce) return cmd_reduce(f);
    if (*modes) return cmd_modes(f);
    if (*fit) return cmd_fit(f);
    if (*simulate) return cmd_simulate(f);
    if (*compare) return cmd_compare(f);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
