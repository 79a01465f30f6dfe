#include "dyneq/sim/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "dyneq/error.hpp"

namespace dyneq::sim {

std::string_view to_string(EventKind k) {
  switch (k) {
    case EventKind::three_phase_fault: return "three_phase_fault";
    case EventKind::branch_trip: return "branch_trip";
    case EventKind::load_step: return "load_step";
  }
  return "?";
}

EventKind event_kind_from_string(std::string_view s) {
  for (auto k : {EventKind::three_phase_fault, EventKind::branch_trip, EventKind::load_step})
    if (to_string(k) == s) return k;
  throw Error(ErrorKind::Parse, "unknown event kind '" + std::string(s) + "'");
}

nlohmann::json to_json(const Event& e) {
  nlohmann::json j{{"kind", to_string(e.kind)},
                   {"target", e.target},
                   {"t_start", e.t_start},
                   {"duration", e.duration}};
  if (e.kind == EventKind::three_phase_fault)
    j["fault_admittance"] = {{"g", e.fault_admittance.real()}, {"b", e.fault_admittance.imag()}};
  if (e.kind == EventKind::load_step) {
    j["p_mw"] = e.load_delta.real();
    j["q_mvar"] = e.load_delta.imag();
  }
  return j;
}

Event event_from_json(const nlohmann::json& j, const std::string& locus) {
  try {
    Event e;
    e.kind = event_kind_from_string(j.at("kind").get<std::string>());
    const auto& t = j.at("target");
    e.target = t.is_string() ? t.get<std::string>() : t.dump();
    e.t_start = j.value("t_start", 0.0);
    e.duration = j.value("duration", 0.0);
    if (j.contains("fault_admittance")) {
      const auto& y = j.at("fault_admittance");
      e.fault_admittance = {y.value("g", 0.0), y.value("b", 0.0)};
    }
    e.load_delta = {j.value("p_mw", 0.0), j.value("q_mvar", 0.0)};
    return e;
  } catch (const nlohmann::json::exception& ex) {
    throw Error(ErrorKind::Parse, locus + ": " + ex.what());
  }
}

namespace {

struct Window {
  long on = 0, off = -1;  // step indices; off < 0 means permanent
  const Event* event = nullptr;
};

dynamics::NetworkChange network_at(long step, const std::vector<Window>& windows,
                                   const PowerSystemCase& c, const BusVoltageSolution& sol) {
  dynamics::NetworkChange ch;
  for (const auto& w : windows) {
    if (step < w.on || (w.off >= 0 && step >= w.off)) continue;
    const Event& e = *w.event;
    switch (e.kind) {
      case EventKind::three_phase_fault: ch.bus_shunts.emplace_back(e.target, e.fault_admittance); break;
      case EventKind::branch_trip: ch.tripped_branches.push_back(e.target); break;
      case EventKind::load_step: {
        const double vm2 = std::norm(sol.voltage_at(e.target));
        ch.bus_shunts.emplace_back(e.target, std::conj(e.load_delta / c.base_mva) / vm2);
        break;
      }
    }
  }
  return ch;
}

}  // namespace

Trajectory simulate(const PowerSystemCase& c, const std::vector<Event>& events,
                    const SimOptions& options) {
  const auto sol = solve_powerflow(c);
  dynamics::DynamicSystem sys(c, sol, options.dynamics);
  return simulate(sys, events, options, sol);
}

Trajectory simulate(dynamics::DynamicSystem& sys, const std::vector<Event>& events,
                    const SimOptions& options, const BusVoltageSolution& sol) {
  const auto& c = sys.case_data();
  if (!(options.dt > 0.0)) throw Error(ErrorKind::InvalidArgument, "dt must be > 0");
  if (!(options.t_end > 0.0)) throw Error(ErrorKind::InvalidArgument, "t_end must be > 0");
  const long steps = std::lround(options.t_end / options.dt);
  const double h = options.dt;

  std::vector<Window> windows;
  for (const auto& e : events) {
    if (e.t_start < 0.0 || e.t_start > options.t_end)
      throw Error(ErrorKind::InvalidArgument, "event at t = " + std::to_string(e.t_start) +
                                                  " lies outside [0, t_end]");
    if (e.kind == EventKind::three_phase_fault && !(e.duration > 0.0))
      throw Error(ErrorKind::InvalidArgument, "fault duration must be > 0");
    if (e.kind == EventKind::branch_trip) {
      if (std::none_of(c.branches.begin(), c.branches.end(),
                       [&](const Branch& b) { return b.id == e.target; }))
        throw Error(ErrorKind::InvalidArgument, "event branch '" + e.target + "' not in case");
    } else if (!c.bus_index(e.target)) {
      throw Error(ErrorKind::InvalidArgument, "event bus '" + e.target + "' not in case");
    }
    Window w;
    w.on = std::lround(e.t_start / h);
    w.off = e.duration > 0.0 ? std::lround((e.t_start + e.duration) / h) : -1;
    if (w.off >= 0 && w.off <= w.on) w.off = w.on + 1;
    w.event = &e;
    windows.push_back(w);
  }

  Trajectory traj;
  const std::size_t ng = c.generators.size();
  for (std::size_t g = 0; g < ng; ++g) {
    const auto& id = c.generators[g].id;
    traj.add_channel(id + ".delta");
    traj.add_channel(id + ".delta_omega");
    traj.add_channel(id + ".p_e");
    traj.add_channel(id + ".v_t");
    if (sys.eq_index(g) >= 0) traj.add_channel(id + ".eq_prime");
  }
  for (const auto& ctl : c.controllers)
    traj.add_channel(ctl.id + "." + std::string(to_string(ctl.output_signal)));

  const bool inf = sys.has_infinite_bus();
  const double inf_angle = inf ? std::arg(sol.voltage_at(c.slack_bus)) : 0.0;
  auto record = [&](double t, const Eigen::VectorXd& x, const dynamics::Snapshot& s) {
    traj.time.push_back(t);
    std::size_t ch = 0;
    for (std::size_t g = 0; g < ng; ++g) {
      traj.channels[ch++].push_back(x(sys.delta_index(g)));
      traj.channels[ch++].push_back(x(sys.omega_index(g)));
      traj.channels[ch++].push_back(s.pe[g]);
      traj.channels[ch++].push_back(s.vt[g]);
      if (sys.eq_index(g) >= 0) traj.channels[ch++].push_back(x(sys.eq_index(g)));
    }
    for (double y : s.controller_output) traj.channels[ch++].push_back(y);
    traj.balance_residual.push_back(s.balance_residual);
    if (!traj.unstable) {
      double lo = inf ? inf_angle : 1e300, hi = inf ? inf_angle : -1e300;
      for (std::size_t g = 0; g < ng; ++g) {
        lo = std::min(lo, x(sys.delta_index(g)));
        hi = std::max(hi, x(sys.delta_index(g)));
      }
      if (hi - lo > std::numbers::pi) {
        traj.unstable = true;
        traj.unstable_time = t;
      }
    }
  };

  Eigen::VectorXd x = sys.x0();
  if (options.initial_offset.size() > 0) {
    if (options.initial_offset.size() != x.size())
      throw Error(ErrorKind::InvalidArgument, "initial_offset length differs from the state count");
    x += options.initial_offset;
  }
  sys.set_network(network_at(0, windows, c, sol));
  auto snap = sys.evaluate(x);
  record(0.0, x, snap);
  Eigen::VectorXd fn = snap.f;
  const Eigen::Index n = sys.size();
  const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(n, n);

  // The iteration matrix I - h/2 J is kept across steps and rebuilt after
  // switching or when Newton stalls.
  Eigen::PartialPivLU<Eigen::MatrixXd> lu;
  bool stale = true;
  Eigen::VectorXd xn(n), g(n), dx(n);
  for (long k = 0; k < steps; ++k) {
    const double t1 = double(k + 1) * h;
    xn = x + h * fn;
    bool converged = false;
    for (int it = 0; it < options.max_newton; ++it) {
      if (stale || (it > 0 && it % 4 == 0)) {
        lu.compute(eye - 0.5 * h * sys.jacobian(xn));
        stale = false;
      }
      g = xn - x - 0.5 * h * (fn + sys.f(xn));
      dx = lu.solve(g);
      xn -= dx;
      if (!xn.allFinite()) break;
      if (dx.lpNorm<Eigen::Infinity>() <= options.newton_tol * std::max(1.0, xn.lpNorm<Eigen::Infinity>())) {
        converged = true;
        break;
      }
    }
    if (!xn.allFinite() || xn.lpNorm<Eigen::Infinity>() > options.blowup)
      throw Error(ErrorKind::NumericBlowup, "state exceeded bounds at t = " + std::to_string(t1));
    if (!converged)
      throw Error(ErrorKind::StepRejected, "Newton iteration failed at t = " + std::to_string(t1));
    x = xn;
    // Switching takes effect at the grid point; states are continuous.
    const auto ch = network_at(k + 1, windows, c, sol);
    if (!(ch == sys.network())) {
      sys.set_network(ch);
      stale = true;
    }
    sys.evaluate(x, snap);
    fn = snap.f;
    record(t1, x, snap);
  }
  sys.set_network({});
  return traj;
}

}  // namespace dyneq::sim
