#include "dyneq/netred/rei.hpp"

#include <algorithm>
#include <cmath>

#include "dyneq/error.hpp"

namespace dyneq::netred {

namespace {
constexpr double kZeroInjection = 1e-9;
}

ReiMesh build_rei(const std::vector<std::string>& group, const PowerSystemCase& c,
                  const BusVoltageSolution& sol, const std::string& equivalent_bus,
                  const std::string& ground_node) {
  if (group.empty()) throw Error(ErrorKind::EmptyGroup, "REI group is empty");
  ReiMesh m;
  m.group = group;
  std::sort(m.group.begin(), m.group.end());
  for (const auto& id : m.group) {
    const auto gi = c.generator_index(id);
    if (!gi) throw Error(ErrorKind::InvalidArgument, "generator '" + id + "' not in case");
    const auto& g = c.generators[*gi];
    if (c.bus(g.bus).zone != Zone::external)
      throw Error(ErrorKind::InvalidArgument, "generator '" + id + "' is not in the external zone");
    auto it = std::find(m.member_buses.begin(), m.member_buses.end(), g.bus);
    if (it == m.member_buses.end()) {
      m.member_buses.push_back(g.bus);
      m.member_injection.push_back(sol.generator_power[*gi]);
    } else {
      m.member_injection[std::size_t(it - m.member_buses.begin())] += sol.generator_power[*gi];
    }
  }
  for (const auto& s : m.member_injection) m.equivalent_injection += s;
  if (std::abs(m.equivalent_injection) < kZeroInjection)
    throw Error(ErrorKind::ZeroInjectionGroup, "group injection is zero; REI is undefined");

  if (m.member_buses.size() == 1) {
    m.degenerate = true;
    m.equivalent_bus = m.member_buses.front();
    m.equivalent_voltage = sol.voltage_at(m.equivalent_bus);
    return m;
  }

  m.equivalent_bus = equivalent_bus;
  m.ground_node = ground_node;
  Complex i_r{};
  for (std::size_t k = 0; k < m.member_buses.size(); ++k) {
    const Complex v = sol.voltage_at(m.member_buses[k]);
    const Complex s = m.member_injection[k];
    m.member_admittance.push_back(-std::conj(s) / std::norm(v));
    i_r += std::conj(s / v);
  }
  if (std::abs(i_r) < kZeroInjection)
    throw Error(ErrorKind::ZeroInjectionGroup, "group current is zero; REI is undefined");
  m.equivalent_voltage = m.equivalent_injection / std::conj(i_r);
  m.equivalent_admittance = std::conj(m.equivalent_injection) / std::norm(m.equivalent_voltage);

  // Power entering at R against power delivered to the member buses, and the
  // complex power absorbed by the mesh branches (zero by construction).
  Complex delivered{}, absorbed{};
  for (std::size_t k = 0; k < m.member_buses.size(); ++k) {
    const Complex v = sol.voltage_at(m.member_buses[k]);
    const Complex i = m.member_admittance[k] * (Complex{} - v);
    delivered += v * std::conj(i);
    absorbed += std::conj(m.member_admittance[k]) * std::norm(v);
  }
  const Complex entering =
      m.equivalent_voltage * std::conj(m.equivalent_admittance * m.equivalent_voltage);
  absorbed += std::conj(m.equivalent_admittance) * std::norm(m.equivalent_voltage);
  m.power_residual = std::max({std::abs(entering - delivered),
                               std::abs(entering - m.equivalent_injection), std::abs(absorbed)});
  return m;
}

}  // namespace dyneq::netred
