#include "dyneq/netred/reduce.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "dyneq/error.hpp"
#include "dyneq/netred/admittance.hpp"

namespace dyneq::netred {

namespace {

std::string unique_id(const std::string& wanted, const std::set<std::string>& taken) {
  if (!taken.count(wanted)) return wanted;
  for (int k = 1;; ++k) {
    auto id = wanted + "_" + std::to_string(k);
    if (!taken.count(id)) return id;
  }
}

void stamp(Eigen::MatrixXcd& y, Eigen::Index f, Eigen::Index t, const BranchStamp& s, double sign) {
  y(f, f) += sign * s.ff;
  y(f, t) += sign * s.ft;
  y(t, f) += sign * s.tf;
  y(t, t) += sign * s.tt;
}

}  // namespace

NetworkReduction reduce_network(const PowerSystemCase& c, const BusVoltageSolution& sol,
                                const std::vector<std::vector<std::string>>& groups) {
  NetworkReduction out;
  const bool has_external = std::any_of(c.buses.begin(), c.buses.end(),
                                        [](const Bus& b) { return b.zone == Zone::external; });
  if (!has_external) {
    out.reduced = c;
    out.log.push_back("external zone is empty; case returned unchanged");
    return out;
  }
  if (c.bus(c.slack_bus).zone == Zone::external)
    throw Error(ErrorKind::InvalidArgument, "slack bus lies in the external zone");

  std::set<std::string> taken;
  for (const auto& b : c.buses) taken.insert(b.id);

  // REI meshes.
  std::set<std::string> grouped;
  for (std::size_t k = 0; k < groups.size(); ++k) {
    const std::string r = unique_id("rei" + std::to_string(k + 1), taken);
    taken.insert(r);
    const std::string g = unique_id(r + "_g", taken);
    auto mesh = build_rei(groups[k], c, sol, r, g);
    if (!mesh.degenerate) taken.insert(g);
    for (const auto& id : mesh.group) {
      if (!grouped.insert(id).second)
        throw Error(ErrorKind::InvalidArgument, "generator '" + id + "' appears in two groups");
      out.generator_bus[id] = mesh.equivalent_bus;
    }
    std::ostringstream msg;
    msg << "REI " << mesh.equivalent_bus << ": " << mesh.group.size() << " generator(s) on "
        << mesh.member_buses.size() << " bus(es), injection " << mesh.equivalent_injection.real()
        << (mesh.equivalent_injection.imag() >= 0 ? "+" : "") << mesh.equivalent_injection.imag()
        << "j pu, residual " << mesh.power_residual << (mesh.degenerate ? " (degenerate)" : "");
    out.log.push_back(msg.str());
    out.meshes.push_back(std::move(mesh));
  }

  // Kept buses: internal, boundary, equivalent buses, and external buses still
  // hosting generators outside every group.
  std::set<std::string> keep_set;
  for (const auto& b : c.buses)
    if (b.zone != Zone::external) keep_set.insert(b.id);
  for (const auto& m : out.meshes) keep_set.insert(m.equivalent_bus);
  for (const auto& g : c.generators)
    if (c.bus(g.bus).zone == Zone::external && !grouped.count(g.id)) {
      keep_set.insert(g.bus);
      out.log.push_back("generator " + g.id + " is in no group; bus " + g.bus + " kept");
    }

  // Extended network: original buses then mesh nodes. Loads at kept original
  // buses stay loads; every other load becomes an admittance.
  std::vector<std::string> ids;
  for (const auto& b : c.buses) ids.push_back(b.id);
  for (const auto& m : out.meshes)
    if (!m.degenerate) {
      ids.push_back(m.equivalent_bus);
      ids.push_back(m.ground_node);
    }
  const Eigen::Index nb = Eigen::Index(c.buses.size()), nx = Eigen::Index(ids.size());
  AdmittanceMatrix ext;
  ext.bus_ids = ids;
  ext.y = Eigen::MatrixXcd::Zero(nx, nx);
  ext.y.topLeftCorner(nb, nb) = assemble_ybus(c, false);
  const auto pq = constant_power_load(c);
  const auto yz = impedance_load_admittance(c);
  for (Eigen::Index b = 0; b < nb; ++b)
    if (!keep_set.count(c.buses[std::size_t(b)].id))
      ext.y(b, b) += std::conj(pq(b)) / std::norm(sol.voltage[std::size_t(b)]) + yz(b);
  for (const auto& m : out.meshes) {
    if (m.degenerate) continue;
    const auto g = *ext.index(m.ground_node), r = *ext.index(m.equivalent_bus);
    for (std::size_t k = 0; k < m.member_buses.size(); ++k) {
      const auto i = *ext.index(m.member_buses[k]);
      const Complex y = m.member_admittance[k];
      stamp(ext.y, i, g, {y, -y, -y, y}, 1.0);
    }
    const Complex y = m.equivalent_admittance;
    stamp(ext.y, r, g, {y, -y, -y, y}, 1.0);
  }

  std::vector<std::string> keep;
  for (const auto& id : ids)
    if (keep_set.count(id)) keep.push_back(id);
  for (const auto& id : ids)
    if (!keep_set.count(id)) out.eliminated_buses.push_back(id);
  const auto red = kron_eliminate(ext, keep);

  // Reduced case skeleton.
  PowerSystemCase& rc = out.reduced;
  rc.base_mva = c.base_mva;
  rc.frequency_hz = c.frequency_hz;
  rc.slack_bus = c.slack_bus;
  for (const auto& b : c.buses)
    if (keep_set.count(b.id)) rc.buses.push_back(b);
  for (const auto& m : out.meshes) {
    if (m.degenerate) continue;
    Bus b;
    b.id = m.equivalent_bus;
    b.base_kv = c.bus(m.member_buses.front()).base_kv;
    b.zone = Zone::external;
    rc.buses.push_back(b);
  }

  // Whatever Kron adds on top of the preserved branches and shunts becomes
  // equivalent branches plus bus shunts.
  Eigen::MatrixXcd dy = red.y;
  auto ridx = [&](const std::string& id) { return *red.index(id); };
  for (const auto& br : c.branches) {
    if (!keep_set.count(br.from_bus) || !keep_set.count(br.to_bus)) continue;
    rc.branches.push_back(br);
    stamp(dy, ridx(br.from_bus), ridx(br.to_bus), branch_stamp(br), -1.0);
  }
  for (const auto& b : rc.buses) dy(ridx(b.id), ridx(b.id)) -= b.shunt;

  const double scale = std::max(1.0, red.y.cwiseAbs().maxCoeff());
  const double drop = 1e-11 * scale;
  std::set<std::string> branch_ids;
  for (const auto& br : c.branches) branch_ids.insert(br.id);
  for (Eigen::Index i = 0; i < dy.rows(); ++i) {
    Complex rowsum = dy(i, i);
    for (Eigen::Index j = 0; j < dy.cols(); ++j)
      if (j != i) rowsum += dy(i, j);
    auto& bus = rc.buses[std::size_t(std::find_if(rc.buses.begin(), rc.buses.end(),
                                                  [&](const Bus& b) { return b.id == red.bus_ids[std::size_t(i)]; }) -
                                     rc.buses.begin())];
    if (std::abs(rowsum) > drop) bus.shunt += rowsum;
    for (Eigen::Index j = i + 1; j < dy.cols(); ++j) {
      const Complex off = 0.5 * (dy(i, j) + dy(j, i));
      if (std::abs(off) <= drop) continue;
      Branch br;
      br.id = unique_id("eq_" + red.bus_ids[std::size_t(i)] + "_" + red.bus_ids[std::size_t(j)],
                        branch_ids);
      branch_ids.insert(br.id);
      br.from_bus = red.bus_ids[std::size_t(i)];
      br.to_bus = red.bus_ids[std::size_t(j)];
      br.series_admittance = -off;
      rc.branches.push_back(br);
      out.equivalent_branches.push_back(br.id);
    }
  }

  for (const auto& l : c.loads)
    if (keep_set.count(l.bus)) rc.loads.push_back(l);
  for (auto g : c.generators) {
    auto it = out.generator_bus.find(g.id);
    if (it != out.generator_bus.end() && it->second != g.bus) {
      const auto& mesh = *std::find_if(out.meshes.begin(), out.meshes.end(),
                                       [&](const ReiMesh& m) { return m.equivalent_bus == it->second; });
      g.bus = it->second;
      g.v_set = std::abs(mesh.equivalent_voltage);
    }
    rc.generators.push_back(g);
  }
  rc.controllers = c.controllers;

  // A boundary bus whose external side was eliminated entirely has nothing
  // left to bound.
  for (auto& b : rc.buses) {
    if (b.zone != Zone::boundary) continue;
    const bool faces_external = std::any_of(rc.branches.begin(), rc.branches.end(), [&](const Branch& br) {
      const std::string* other = br.from_bus == b.id ? &br.to_bus : br.to_bus == b.id ? &br.from_bus : nullptr;
      return other && rc.bus(*other).zone == Zone::external;
    });
    if (!faces_external) {
      b.zone = Zone::internal;
      out.log.push_back("bus " + b.id + " has no external neighbour left; marked internal");
    }
  }
  out.log.push_back("eliminated " + std::to_string(out.eliminated_buses.size()) + " bus(es), added " +
                    std::to_string(out.equivalent_branches.size()) + " equivalent branch(es)");

  validate(rc);

  // Base-case preservation at the boundary.
  const auto rsol = solve_powerflow(rc);
  for (const auto& b : c.buses) {
    if (b.zone != Zone::boundary) continue;
    BoundaryCheck chk;
    chk.bus = b.id;
    chk.full_voltage = sol.voltage_at(b.id);
    chk.reduced_voltage = rsol.voltage_at(b.id);
    chk.voltage_error = std::abs(std::abs(chk.full_voltage) - std::abs(chk.reduced_voltage));
    chk.angle_error = std::abs(std::arg(chk.full_voltage / chk.reduced_voltage));
    out.boundary.push_back(chk);
  }
  const auto& full_flows = sol.branch_flows;
  for (std::size_t k = 0; k < c.branches.size(); ++k) {
    const auto& br = c.branches[k];
    if (!keep_set.count(br.from_bus) || !keep_set.count(br.to_bus)) continue;
    if (c.bus(br.from_bus).zone != Zone::boundary && c.bus(br.to_bus).zone != Zone::boundary)
      continue;
    for (const auto& f : rsol.branch_flows)
      if (f.branch_id == br.id)
        out.max_boundary_flow_error =
            std::max({out.max_boundary_flow_error, std::abs(f.from_end - full_flows[k].from_end),
                      std::abs(f.to_end - full_flows[k].to_end)});
  }
  std::ostringstream msg;
  double worst_v = 0.0;
  for (const auto& b : out.boundary) worst_v = std::max({worst_v, b.voltage_error, b.angle_error});
  msg << "boundary voltage error " << worst_v << " pu/rad, boundary flow error "
      << out.max_boundary_flow_error << " pu";
  out.log.push_back(msg.str());
  out.log.push_back("REI is exact at the base case only; off-base-case behaviour is approximate");
  return out;
}

}  // namespace dyneq::netred
