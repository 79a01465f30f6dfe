#include "dyneq/model/case.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <set>
#include <sstream>
#include <unordered_map>

#include "dyneq/error.hpp"
#include "dyneq/model/powerflow.hpp"

namespace dyneq {

std::string_view to_string(Zone z) {
  switch (z) {
    case Zone::internal: return "internal";
    case Zone::external: return "external";
    case Zone::boundary: return "boundary";
  }
  return "?";
}

std::string_view to_string(SignalKind s) {
  switch (s) {
    case SignalKind::delta_omega: return "delta_omega";
    case SignalKind::delta_pe: return "delta_pe";
    case SignalKind::delta_vt: return "delta_vt";
    case SignalKind::delta_pmech: return "delta_pmech";
    case SignalKind::vref: return "vref";
    case SignalKind::efd: return "efd";
    case SignalKind::vpss: return "vpss";
  }
  return "?";
}

std::string_view to_string(ControllerKind k) {
  switch (k) {
    case ControllerKind::avr: return "AVR";
    case ControllerKind::pss: return "PSS";
    case ControllerKind::gov: return "GOV";
  }
  return "?";
}

std::string_view to_string(BlockType b) {
  switch (b) {
    case BlockType::gain: return "gain";
    case BlockType::lag: return "lag";
    case BlockType::leadlag: return "leadlag";
    case BlockType::washout: return "washout";
    case BlockType::integrator: return "integrator";
    case BlockType::pi: return "pi";
    case BlockType::tf: return "tf";
  }
  return "?";
}

std::optional<Zone> zone_from_string(std::string_view s) {
  for (Zone z : {Zone::internal, Zone::external, Zone::boundary})
    if (to_string(z) == s) return z;
  return std::nullopt;
}

std::optional<SignalKind> signal_from_string(std::string_view s) {
  for (SignalKind k : {SignalKind::delta_omega, SignalKind::delta_pe, SignalKind::delta_vt,
                       SignalKind::delta_pmech, SignalKind::vref, SignalKind::efd,
                       SignalKind::vpss})
    if (to_string(k) == s) return k;
  return std::nullopt;
}

std::optional<ControllerKind> controller_kind_from_string(std::string_view s) {
  for (ControllerKind k : {ControllerKind::avr, ControllerKind::pss, ControllerKind::gov})
    if (to_string(k) == s) return k;
  return std::nullopt;
}

std::optional<BlockType> block_type_from_string(std::string_view s) {
  for (BlockType b : {BlockType::gain, BlockType::lag, BlockType::leadlag, BlockType::washout,
                      BlockType::integrator, BlockType::pi, BlockType::tf})
    if (to_string(b) == s) return b;
  return std::nullopt;
}

namespace {

template <class T>
std::optional<std::size_t> find_by_id(const std::vector<T>& items, std::string_view id) {
  for (std::size_t i = 0; i < items.size(); ++i)
    if (items[i].id == id) return i;
  return std::nullopt;
}

}  // namespace

std::optional<std::size_t> PowerSystemCase::bus_index(std::string_view id) const {
  return find_by_id(buses, id);
}
std::optional<std::size_t> PowerSystemCase::generator_index(std::string_view id) const {
  return find_by_id(generators, id);
}
std::optional<std::size_t> PowerSystemCase::controller_index(std::string_view id) const {
  return find_by_id(controllers, id);
}

const Bus& PowerSystemCase::bus(std::string_view id) const {
  auto i = bus_index(id);
  if (!i) throw Error(ErrorKind::InvalidArgument, "unknown bus '" + std::string(id) + "'");
  return buses[*i];
}
const Generator& PowerSystemCase::generator(std::string_view id) const {
  auto i = generator_index(id);
  if (!i) throw Error(ErrorKind::InvalidArgument, "unknown generator '" + std::string(id) + "'");
  return generators[*i];
}
const Controller& PowerSystemCase::controller(std::string_view id) const {
  auto i = controller_index(id);
  if (!i) throw Error(ErrorKind::InvalidArgument, "unknown controller '" + std::string(id) + "'");
  return controllers[*i];
}

bool operator==(const PowerSystemCase& a, const PowerSystemCase& b) {
  return a.base_mva == b.base_mva && a.frequency_hz == b.frequency_hz &&
         a.slack_bus == b.slack_bus && a.buses == b.buses && a.branches == b.branches &&
         a.generators == b.generators && a.controllers == b.controllers && a.loads == b.loads;
}

int signal_stage(SignalKind s) {
  switch (s) {
    case SignalKind::delta_omega:
    case SignalKind::delta_pe:
    case SignalKind::delta_vt:
    case SignalKind::vref: return 0;
    case SignalKind::vpss: return 1;
    case SignalKind::efd: return 2;
    case SignalKind::delta_pmech: return 3;
  }
  return 0;
}

int controller_stage(ControllerKind k) {
  switch (k) {
    case ControllerKind::pss: return 1;
    case ControllerKind::avr: return 2;
    case ControllerKind::gov: return 3;
  }
  return 0;
}

SignalKind expected_output(ControllerKind k) {
  switch (k) {
    case ControllerKind::pss: return SignalKind::vpss;
    case ControllerKind::avr: return SignalKind::efd;
    case ControllerKind::gov: return SignalKind::delta_pmech;
  }
  return SignalKind::vpss;
}

namespace {

bool finite(double v) { return std::isfinite(v); }

std::size_t trimmed_degree(const std::vector<double>& p) {
  std::size_t n = p.size();
  while (n > 1 && p[n - 1] == 0.0) --n;
  return n == 0 ? 0 : n - 1;
}

const std::set<std::string>& limit_keys() {
  static const std::set<std::string> keys{"vmin", "vmax", "min", "max"};
  return keys;
}

const std::set<std::string>& allowed_keys(BlockType t) {
  static const std::map<BlockType, std::set<std::string>> keys{
      {BlockType::gain, {"k"}},
      {BlockType::lag, {"k", "t"}},
      {BlockType::leadlag, {"k", "t1", "t2"}},
      {BlockType::washout, {"k", "t"}},
      {BlockType::integrator, {"k"}},
      {BlockType::pi, {"kp", "ki"}},
      {BlockType::tf, {}},
  };
  return keys.at(t);
}

void check_block(const Block& b, const std::string& locus, std::vector<std::string>& errs,
                 std::vector<std::string>& warns) {
  for (const auto& [key, value] : b.params) {
    if (limit_keys().count(key)) {
      warns.push_back(locus + ": limiter '" + key + "' ignored by the linear model");
      continue;
    }
    if (!allowed_keys(b.type).count(key))
      errs.push_back(locus + ": unknown parameter '" + key + "' for block type " +
                     std::string(to_string(b.type)));
    if (!finite(value)) errs.push_back(locus + ": parameter '" + key + "' is not finite");
  }
  switch (b.type) {
    case BlockType::lag:
      if (b.param("t", 0.0) < 0.0) errs.push_back(locus + ": lag time constant must be >= 0");
      break;
    case BlockType::leadlag: {
      double t1 = b.param("t1", 0.0), t2 = b.param("t2", 0.0);
      if (t1 < 0.0 || t2 < 0.0) errs.push_back(locus + ": lead-lag time constants must be >= 0");
      if (t2 == 0.0 && t1 != 0.0) errs.push_back(locus + ": lead-lag with t2 = 0 is improper");
      break;
    }
    case BlockType::washout:
      if (!(b.param("t", 0.0) > 0.0)) errs.push_back(locus + ": washout time constant must be > 0");
      break;
    case BlockType::tf: {
      if (b.num.empty() || b.den.empty()) {
        errs.push_back(locus + ": tf block needs num and den");
        break;
      }
      bool ok = true;
      for (double v : b.num) ok = ok && finite(v);
      for (double v : b.den) ok = ok && finite(v);
      if (!ok) errs.push_back(locus + ": tf coefficients must be finite");
      if (std::all_of(b.den.begin(), b.den.end(), [](double v) { return v == 0.0; })) {
        errs.push_back(locus + ": tf denominator is zero");
        break;
      }
      if (trimmed_degree(b.num) > trimmed_degree(b.den))
        errs.push_back(locus + ": tf block is improper");
      break;
    }
    default: break;
  }
}

template <class T>
void check_unique_ids(const std::vector<T>& items, const char* what,
                      std::vector<std::string>& errs) {
  std::set<std::string> seen;
  for (const auto& it : items) {
    if (it.id.empty()) errs.push_back(std::string(what) + " with empty id");
    if (!seen.insert(it.id).second)
      errs.push_back(std::string("duplicate ") + what + " id '" + it.id + "'");
  }
}

}  // namespace

void validate(PowerSystemCase& c) {
  std::vector<std::string> errs;
  std::vector<std::string> warns;

  if (!(c.base_mva > 0.0)) errs.push_back("base_mva must be > 0");
  if (!(c.frequency_hz > 0.0)) errs.push_back("frequency_hz must be > 0");
  check_unique_ids(c.buses, "bus", errs);
  check_unique_ids(c.branches, "branch", errs);
  check_unique_ids(c.generators, "generator", errs);
  check_unique_ids(c.controllers, "controller", errs);

  std::unordered_map<std::string, std::size_t> bus_of;
  for (std::size_t i = 0; i < c.buses.size(); ++i) {
    const auto& b = c.buses[i];
    bus_of.emplace(b.id, i);
    if (!(b.base_kv > 0.0)) errs.push_back("bus '" + b.id + "': base_kv must be > 0");
    if (!finite(b.shunt.real()) || !finite(b.shunt.imag()))
      errs.push_back("bus '" + b.id + "': shunt is not finite");
  }
  if (c.buses.empty()) errs.push_back("case has no buses");
  if (!bus_of.count(c.slack_bus)) errs.push_back("slack_bus '" + c.slack_bus + "' does not exist");

  // Adjacency by zone for the boundary invariant and connectivity.
  std::vector<std::vector<std::size_t>> adj(c.buses.size());
  for (const auto& br : c.branches) {
    auto f = bus_of.find(br.from_bus), t = bus_of.find(br.to_bus);
    std::string where = "branch '" + br.id + "'";
    if (f == bus_of.end()) errs.push_back(where + ": from_bus '" + br.from_bus + "' does not exist");
    if (t == bus_of.end()) errs.push_back(where + ": to_bus '" + br.to_bus + "' does not exist");
    if (br.from_bus == br.to_bus) errs.push_back(where + ": from_bus equals to_bus");
    if (br.series_admittance == Complex{}) errs.push_back(where + ": series admittance is zero");
    if (!(br.tap > 0.0)) errs.push_back(where + ": tap must be > 0");
    if (f != bus_of.end() && t != bus_of.end() && f->second != t->second) {
      adj[f->second].push_back(t->second);
      adj[t->second].push_back(f->second);
      Zone zf = c.buses[f->second].zone, zt = c.buses[t->second].zone;
      if ((zf == Zone::internal && zt == Zone::external) ||
          (zf == Zone::external && zt == Zone::internal))
        errs.push_back(where + ": connects internal and external buses without a boundary bus");
    }
  }
  for (std::size_t i = 0; i < c.buses.size(); ++i) {
    if (c.buses[i].zone != Zone::boundary) continue;
    bool to_int = false, to_ext = false;
    for (auto j : adj[i]) {
      to_int = to_int || c.buses[j].zone == Zone::internal;
      to_ext = to_ext || c.buses[j].zone == Zone::external;
    }
    if (!to_int || !to_ext)
      errs.push_back("boundary bus '" + c.buses[i].id +
                     "' needs a branch to an internal bus and one to an external bus");
  }
  if (auto s = bus_of.find(c.slack_bus); s != bus_of.end() && !c.buses.empty()) {
    std::vector<char> seen(c.buses.size(), 0);
    std::deque<std::size_t> queue{s->second};
    seen[s->second] = 1;
    while (!queue.empty()) {
      auto u = queue.front();
      queue.pop_front();
      for (auto v : adj[u])
        if (!seen[v]) {
          seen[v] = 1;
          queue.push_back(v);
        }
    }
    std::vector<std::string> islanded;
    for (std::size_t i = 0; i < c.buses.size(); ++i)
      if (!seen[i]) islanded.push_back(c.buses[i].id);
    if (!islanded.empty()) {
      std::string list;
      for (const auto& id : islanded) list += (list.empty() ? "" : ", ") + id;
      errs.push_back("network is not connected; buses without a path to the slack: " + list);
    }
  }

  for (const auto& ld : c.loads)
    if (!bus_of.count(ld.bus)) errs.push_back("load at unknown bus '" + ld.bus + "'");

  std::unordered_map<std::string, std::string> owner;
  for (const auto& g : c.generators) {
    std::string where = "generator '" + g.id + "'";
    if (!bus_of.count(g.bus)) errs.push_back(where + ": bus '" + g.bus + "' does not exist");
    if (!(g.rated_mva > 0.0)) errs.push_back(where + ": rated_mva must be > 0");
    if (!(g.inertia_h > 0.0)) errs.push_back(where + ": inertia_h must be > 0");
    if (!(g.xd_prime > 0.0)) errs.push_back(where + ": xd_prime must be > 0");
    if (!(g.damping_d >= 0.0)) errs.push_back(where + ": damping_d must be >= 0");
    if (!(g.v_set > 0.0)) errs.push_back(where + ": v_set must be > 0");
    if (g.xd && !(*g.xd >= g.xd_prime)) errs.push_back(where + ": xd must be >= xd_prime");
    if (g.tdo_prime && !(*g.tdo_prime > 0.0)) errs.push_back(where + ": tdo_prime must be > 0");
    if (g.xd.has_value() != g.tdo_prime.has_value())
      errs.push_back(where + ": xd and tdo_prime must be given together");
    if (g.rated_mva > 0.0 && std::hypot(g.p_gen, g.q_gen) > g.rated_mva)
      warns.push_back(where + ": dispatch exceeds rated_mva");
    for (const auto& cid : g.controllers) {
      if (!c.controller_index(cid))
        errs.push_back(where + ": controller '" + cid + "' does not exist");
      auto [it, fresh] = owner.emplace(cid, g.id);
      if (!fresh) errs.push_back("controller '" + cid + "' attached to more than one generator");
    }
  }

  for (const auto& ctl : c.controllers) {
    std::string where = "controller '" + ctl.id + "'";
    if (!owner.count(ctl.id)) errs.push_back(where + ": not attached to any generator");
    if (ctl.input_signals.empty()) errs.push_back(where + ": input_signals is empty");
    std::set<SignalKind> distinct(ctl.input_signals.begin(), ctl.input_signals.end());
    if (distinct.size() != ctl.input_signals.size())
      errs.push_back(where + ": input_signals must be distinct");
    if (ctl.diagram.size() != ctl.input_signals.size())
      errs.push_back(where + ": diagram needs exactly one block chain per input signal");
    if (ctl.output_signal != expected_output(ctl.kind))
      errs.push_back(where + ": a " + std::string(to_string(ctl.kind)) + " must drive " +
                     std::string(to_string(expected_output(ctl.kind))));
    for (auto s : ctl.input_signals)
      if (signal_stage(s) >= controller_stage(ctl.kind))
        errs.push_back(where + ": input " + std::string(to_string(s)) +
                       " is produced at or after this controller's stage");
    for (std::size_t p = 0; p < ctl.diagram.size(); ++p)
      for (std::size_t k = 0; k < ctl.diagram[p].size(); ++k)
        check_block(ctl.diagram[p][k],
                    where + " path " + std::to_string(p) + " block " + std::to_string(k), errs,
                    warns);
  }

  // Multiple machines regulating one bus must agree on the set-point.
  std::unordered_map<std::string, double> vset;
  for (const auto& g : c.generators) {
    auto [it, fresh] = vset.emplace(g.bus, g.v_set);
    if (!fresh && it->second != g.v_set)
      warns.push_back("bus '" + g.bus + "': generators disagree on v_set; the first one is used");
  }

  if (errs.empty()) {
    try {
      solve_powerflow(c);
    } catch (const Error& e) {
      errs.push_back(std::string("flat-start power flow failed: ") + e.what());
    }
  }

  if (!errs.empty()) throw Error(ErrorKind::Validation, "case validation failed", errs);
  for (auto& w : warns)
    if (std::find(c.warnings.begin(), c.warnings.end(), w) == c.warnings.end())
      c.warnings.push_back(std::move(w));
}

}  // namespace dyneq
