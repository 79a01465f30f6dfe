#include "dyneq/pipeline/commands.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <set>
#include <sstream>

#include "dyneq/error.hpp"

namespace dyneq::pipeline {

namespace {

constexpr Complex kJ{0.0, 1.0};

nlohmann::json complex_json(Complex z) { return {{"re", z.real()}, {"im", z.imag()}}; }

std::string lower(std::string_view s) {
  std::string out(s);
  for (auto& ch : out) ch = char(std::tolower(static_cast<unsigned char>(ch)));
  return out;
}

std::string join(const std::vector<std::string>& v, const std::string& sep) {
  std::string out;
  for (std::size_t k = 0; k < v.size(); ++k) out += (k ? sep : "") + v[k];
  return out;
}

ctrlagg::ControllerAggregationOptions aggregation_options(ControllerKind kind,
                                                          const ReductionConfig& cfg) {
  ctrlagg::ControllerAggregationOptions o;
  if (auto it = cfg.common_inputs.find(kind); it != cfg.common_inputs.end())
    o.common_inputs = it->second;
  if (auto it = cfg.orders.find(kind); it != cfg.orders.end()) {
    o.num_order = it->second.first;
    o.den_order = it->second.second;
  }
  o.omega = cfg.grid.omega();
  o.fit.weighting = cfg.weighting;
  return o;
}

nlohmann::json aggregation_json(const ctrlagg::ControllerAggregationResult& r,
                                const std::vector<std::string>& members) {
  nlohmann::json j{{"id", r.equivalent.id},
                   {"kind", to_string(r.equivalent.kind)},
                   {"members", members},
                   {"log", r.log}};
  j["fits"] = nlohmann::json::array();
  for (const auto& f : r.fits)
    j["fits"].push_back({{"input", to_string(f.input)},
                         {"num_order", f.num_order},
                         {"den_order", f.den_order},
                         {"max_rel_error", f.fit.report.max_rel_error},
                         {"rms_rel_error", f.fit.report.rms_rel_error},
                         {"iterations", f.fit.report.iterations},
                         {"converged", f.fit.report.converged}});
  return j;
}

std::vector<CountRow> counts(const PowerSystemCase& a, const PowerSystemCase& b) {
  return {{"buses", a.buses.size(), b.buses.size()},
          {"branches", a.branches.size(), b.branches.size()},
          {"generators", a.generators.size(), b.generators.size()},
          {"controllers", a.controllers.size(), b.controllers.size()},
          {"loads", a.loads.size(), b.loads.size()}};
}

}  // namespace

std::string summary_csv(const std::vector<CountRow>& rows) {
  std::ostringstream os;
  os << "item,full,reduced\n";
  for (const auto& r : rows) os << r.item << ',' << r.full << ',' << r.reduced << '\n';
  return os.str();
}

ReducedModel run_reduction(const PowerSystemCase& full, const ReductionConfig& cfg) {
  ReducedModel m;
  const auto sol = solve_powerflow(full);
  auto& prov = m.provenance;
  prov["inertia_units"] = "H read as MW s / MVA on the machine rating";
  prov["powerflow"] = {{"iterations", sol.iterations}, {"max_mismatch", sol.max_mismatch}};

  const bool has_external = std::any_of(full.buses.begin(), full.buses.end(),
                                        [](const Bus& b) { return b.zone == Zone::external; });
  if (!has_external) {
    m.reduced = full;
    m.warnings.push_back("external zone is empty; the reduced case equals the input");
    prov["warnings"] = m.warnings;
    m.summary = counts(full, m.reduced);
    return m;
  }

  // Coherency.
  std::vector<std::string> external_gens;
  for (const auto& g : full.generators)
    if (full.bus(g.bus).zone == Zone::external) external_gens.push_back(g.id);
  if (!external_gens.empty()) {
    const auto lin = modal::linearize(full, sol, {cfg.one_axis});
    const auto modes = modal::eigenanalysis(lin);
    modal::ModeSelector sel;
    sel.lo_hz = cfg.band_lo_hz;
    sel.hi_hz = cfg.band_hi_hz;
    sel.strategy = cfg.mode_strategy;
    m.grouping = modal::find_coherent_groups(modes, sel, full, cfg.angle_tolerance_deg);
    const auto lam = m.grouping.mode;
    prov["modal"] = {{"mode", {{"re", lam.real()},
                               {"im", lam.imag()},
                               {"freq_hz", std::abs(lam.imag()) / (2 * std::numbers::pi)},
                               {"damping_pct", -100.0 * lam.real() / std::abs(lam)}}},
                     {"angle_tolerance_deg", cfg.angle_tolerance_deg},
                     {"angles_deg", m.grouping.angle_deg},
                     {"groups", m.grouping.groups}};
  }

  // Network.
  m.network = netred::reduce_network(full, sol, m.grouping.groups);
  PowerSystemCase rc = m.network.reduced;
  {
    nlohmann::json meshes = nlohmann::json::array();
    for (const auto& mesh : m.network.meshes)
      meshes.push_back({{"group", mesh.group},
                        {"member_buses", mesh.member_buses},
                        {"equivalent_bus", mesh.equivalent_bus},
                        {"ground_node", mesh.ground_node},
                        {"injection", complex_json(mesh.equivalent_injection)},
                        {"voltage", complex_json(mesh.equivalent_voltage)},
                        {"power_residual", mesh.power_residual},
                        {"degenerate", mesh.degenerate}});
    nlohmann::json boundary = nlohmann::json::array();
    for (const auto& b : m.network.boundary)
      boundary.push_back(
          {{"bus", b.bus}, {"voltage_error", b.voltage_error}, {"angle_error", b.angle_error}});
    prov["network"] = {{"rei", meshes},
                       {"eliminated_buses", m.network.eliminated_buses},
                       {"equivalent_branches", m.network.equivalent_branches},
                       {"boundary", boundary},
                       {"max_boundary_flow_error", m.network.max_boundary_flow_error},
                       {"log", m.network.log}};
  }

  // Machines and controllers per group.
  prov["generators"] = nlohmann::json::array();
  prov["controllers"] = nlohmann::json::array();
  for (const auto& mesh : m.network.meshes) {
    if (mesh.group.size() < 2) continue;
    std::vector<Generator> members;
    genagg::AggregationOptions opt;
    for (const auto& id : mesh.group) {
      const auto& g = full.generator(id);
      const auto gi = *full.generator_index(id);
      const Complex v = sol.voltage_at(g.bus);
      const Complex i = std::conj(sol.generator_power[gi] / v);
      opt.member_emf.push_back(v + kJ * g.xd_prime_sys(full.base_mva) * i);
      opt.member_current.push_back(i);
      members.push_back(rc.generator(id));
    }
    opt.id = "eq_" + join(mesh.group, "_");
    opt.bus = mesh.equivalent_bus;
    auto eq = genagg::aggregate_generators(members, opt);
    eq.generator.v_set = members.front().v_set;
    for (const auto& w : eq.warnings) m.warnings.push_back(eq.generator.id + ": " + w);

    nlohmann::json conv = nlohmann::json::array();
    for (const auto& b : eq.base_conversion_log)
      conv.push_back({{"id", b.id},
                      {"rated_mva", b.rated_mva},
                      {"xd_prime_own", b.xd_prime_own},
                      {"xd_prime_common", b.xd_prime_common},
                      {"kinetic_energy", b.kinetic_energy}});
    prov["generators"].push_back({{"id", eq.generator.id},
                                  {"members", eq.members},
                                  {"rated_mva", eq.generator.rated_mva},
                                  {"inertia_h", eq.generator.inertia_h},
                                  {"xd_prime", eq.generator.xd_prime},
                                  {"damping_d", eq.generator.damping_d},
                                  {"emf_angle_spread_deg", eq.emf_angle_spread_deg},
                                  {"base_conversion", conv},
                                  {"warnings", eq.warnings}});

    // Controllers, kind by kind in stage order; weights cover only the
    // members that own a controller of that kind.
    std::set<std::string> dropped;
    eq.generator.controllers.clear();
    for (auto kind : {ControllerKind::pss, ControllerKind::avr, ControllerKind::gov}) {
      std::vector<ctrlagg::ControllerMember> cm;
      std::vector<std::string> ids;
      for (const auto& g : members)
        for (const auto& cid : g.controllers) {
          const auto& ctl = rc.controller(cid);
          if (ctl.kind != kind) continue;
          cm.push_back({ctl, g});
          ids.push_back(cid);
          dropped.insert(cid);
        }
      if (cm.empty()) continue;
      auto o = aggregation_options(kind, cfg);
      o.id = eq.generator.id + "_" + lower(to_string(kind));
      auto agg = ctrlagg::aggregate_controllers(cm, o);
      prov["controllers"].push_back(aggregation_json(agg, ids));
      eq.generator.controllers.push_back(agg.equivalent.id);
      rc.controllers.push_back(agg.equivalent);
      m.controllers.push_back(std::move(agg));
    }
    std::erase_if(rc.controllers, [&](const Controller& c) { return dropped.count(c.id) > 0; });
    std::erase_if(rc.generators, [&](const Generator& g) {
      return std::find(mesh.group.begin(), mesh.group.end(), g.id) != mesh.group.end();
    });
    rc.generators.push_back(eq.generator);
    m.generators.push_back(std::move(eq));
  }

  rc.warnings.clear();
  validate(rc);
  for (const auto& w : rc.warnings) m.warnings.push_back(w);
  m.reduced = std::move(rc);
  m.summary = counts(full, m.reduced);
  prov["summary"] = nlohmann::json::array();
  for (const auto& r : m.summary)
    prov["summary"].push_back({{"item", r.item}, {"full", r.full}, {"reduced", r.reduced}});
  prov["warnings"] = m.warnings;
  return m;
}

ModesReport run_modes(const PowerSystemCase& c, double lo_hz, double hi_hz, bool one_axis) {
  if (!(lo_hz < hi_hz)) throw Error(ErrorKind::InvalidArgument, "band needs lo < hi");
  ModesReport r;
  const auto sol = solve_powerflow(c);
  r.model = modal::linearize(c, sol, {one_axis});
  r.modal = modal::eigenanalysis(r.model);
  r.rows = modal::modes_in_band(r.modal, lo_hz, hi_hz);
  std::ostringstream os;
  os << std::setprecision(10) << "mode_id,re,im,freq_hz,damping_pct\n";
  for (auto k : r.rows) {
    const auto lam = r.modal.eigenvalues(k);
    os << k << ',' << lam.real() << ',' << lam.imag() << ',' << r.modal.frequency_hz[std::size_t(k)]
       << ',' << 100.0 * r.modal.damping_ratio[std::size_t(k)] << '\n';
  }
  r.modes_csv = os.str();
  std::ostringstream sh;
  sh << std::setprecision(10) << "generator,angle_deg,magnitude\n";
  if (!r.rows.empty()) {
    const auto k = r.rows.front();
    double peak = 0.0;
    for (auto row : r.modal.omega_rows) peak = std::max(peak, std::abs(r.modal.right_eigenvectors(row, k)));
    const auto angles = modal::mode_shape_angles(r.modal, k);
    for (std::size_t g = 0; g < r.modal.generator_ids.size(); ++g) {
      const auto& id = r.modal.generator_ids[g];
      const double mag = std::abs(r.modal.right_eigenvectors(r.modal.omega_rows[g], k));
      sh << id << ',' << angles.at(id) << ',' << (peak > 0 ? mag / peak : 0.0) << '\n';
    }
  }
  r.shapes_csv = sh.str();
  return r;
}

FitCommandResult run_fit(const PowerSystemCase& c, const std::vector<std::string>& controller_ids,
                         const ReductionConfig& cfg) {
  if (controller_ids.empty()) throw Error(ErrorKind::EmptyList, "no controller ids given");
  std::vector<ctrlagg::ControllerMember> members;
  for (const auto& id : controller_ids) {
    if (!c.controller_index(id))
      throw Error(ErrorKind::InvalidArgument, "controller '" + id + "' not in case");
    const auto& ctl = c.controller(id);
    auto owner = std::find_if(c.generators.begin(), c.generators.end(), [&](const Generator& g) {
      return std::find(g.controllers.begin(), g.controllers.end(), id) != g.controllers.end();
    });
    if (owner == c.generators.end())
      throw Error(ErrorKind::InvalidArgument, "controller '" + id + "' has no generator");
    members.push_back({ctl, *owner});
  }
  const auto kind = members.front().controller.kind;
  auto o = aggregation_options(kind, cfg);
  o.id = controller_ids.size() == 1 ? controller_ids.front() + "_fit"
                                    : "eq_" + join(controller_ids, "_");
  FitCommandResult r;
  r.aggregation = ctrlagg::aggregate_controllers(members, o);
  r.controller_json = controller_to_json(r.aggregation.equivalent);
  r.controller_json["fit_report"] = aggregation_json(r.aggregation, controller_ids)["fits"];
  for (const auto& f : r.aggregation.fits) {
    const auto fitted = ctrlagg::evaluate_fr(f.fit.tf, f.target.omega);
    std::ostringstream os;
    os << std::setprecision(12) << "omega,target_re,target_im,fit_re,fit_im,rel_error\n";
    for (std::size_t k = 0; k < f.target.size(); ++k) {
      const auto t = f.target.samples[k], y = fitted.samples[k];
      const double ref = std::abs(t);
      os << f.target.omega[k] << ',' << t.real() << ',' << t.imag() << ',' << y.real() << ','
         << y.imag() << ',' << (ref > 0 ? std::abs(y - t) / ref : std::abs(y - t)) << '\n';
    }
    r.comparison_csv.emplace_back(f.input, os.str());
  }
  return r;
}

CompareReport run_compare(const PowerSystemCase& full, const PowerSystemCase& reduced,
                          const ReductionConfig& cfg) {
  CompareReport r;
  auto dominant = [&](const PowerSystemCase& c) {
    ModeRow row;
    const auto modes = run_modes(c, cfg.band_lo_hz, cfg.band_hi_hz, cfg.one_axis);
    if (!modes.rows.empty()) {
      const auto k = modes.rows.front();
      row.found = true;
      row.freq_hz = modes.modal.frequency_hz[std::size_t(k)];
      row.damping_pct = 100.0 * modes.modal.damping_ratio[std::size_t(k)];
    }
    return row;
  };
  r.full_mode = dominant(full);
  r.reduced_mode = dominant(reduced);

  std::vector<std::string> channels;
  for (const auto& g : full.generators)
    if (reduced.generator_index(g.id))
      for (const char* s : {".delta", ".delta_omega", ".p_e", ".v_t"}) channels.push_back(g.id + s);

  using clock = std::chrono::steady_clock;
  std::ostringstream timings;
  for (const auto& sc : cfg.scenarios) {
    ScenarioComparison out;
    out.name = sc.name;
    try {
      sim::SimOptions opt;
      opt.t_end = sc.t_end;
      opt.dt = sc.dt;
      opt.dynamics.one_axis = cfg.one_axis;
      auto t0 = clock::now();
      const auto a = sim::simulate(full, sc.events, opt);
      auto t1 = clock::now();
      const auto b = sim::simulate(reduced, sc.events, opt);
      auto t2 = clock::now();
      out.full_seconds = std::chrono::duration<double>(t1 - t0).count();
      out.reduced_seconds = std::chrono::duration<double>(t2 - t1).count();
      out.metrics = sim::compare_trajectories(a, b, channels);
      out.ok = true;
    } catch (const Error& e) {
      out.error = e.what();
    }
    timings << sc.name << ": full " << out.full_seconds << " s, reduced " << out.reduced_seconds
            << " s\n";
    r.scenarios.push_back(std::move(out));
  }
  r.timings_log = timings.str();

  auto mode_json = [](const ModeRow& m) {
    return nlohmann::json{{"found", m.found}, {"freq_hz", m.freq_hz}, {"damping_pct", m.damping_pct}};
  };
  r.metrics_json["dominant_mode"] = {{"full", mode_json(r.full_mode)},
                                     {"reduced", mode_json(r.reduced_mode)}};
  r.metrics_json["scenarios"] = nlohmann::json::array();
  for (const auto& s : r.scenarios)
    r.metrics_json["scenarios"].push_back(
        {{"name", s.name}, {"ok", s.ok}, {"error", s.error}, {"metrics", sim::to_json(s.metrics)}});
  std::ostringstream tab;
  tab << std::setprecision(10) << "model,freq_hz,damping_pct\n"
      << "full," << r.full_mode.freq_hz << ',' << r.full_mode.damping_pct << '\n'
      << "reduced," << r.reduced_mode.freq_hz << ',' << r.reduced_mode.damping_pct << '\n';
  r.modal_table_csv = tab.str();
  return r;
}

void write_text(const std::filesystem::path& out_dir, const std::string& name,
                const std::string& text) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  std::ofstream os(out_dir / name, std::ios::binary);
  if (!os) throw Error(ErrorKind::Io, "cannot write " + (out_dir / name).string());
  os << text;
}

}  // namespace dyneq::pipeline
