#include "dyneq/model/powerflow.hpp"

#include <cmath>
#include <unordered_map>

#include "dyneq/error.hpp"

namespace dyneq {

namespace {

constexpr int kMaxIterations = 50;
constexpr double kTolerance = 1e-10;

std::unordered_map<std::string, Eigen::Index> index_buses(const PowerSystemCase& c) {
  std::unordered_map<std::string, Eigen::Index> idx;
  for (std::size_t i = 0; i < c.buses.size(); ++i) idx.emplace(c.buses[i].id, Eigen::Index(i));
  return idx;
}

}  // namespace

Complex BusVoltageSolution::voltage_at(const std::string& bus_id) const {
  for (std::size_t i = 0; i < bus_ids.size(); ++i)
    if (bus_ids[i] == bus_id) return voltage[i];
  throw Error(ErrorKind::InvalidArgument, "no voltage for bus '" + bus_id + "'");
}

BranchStamp branch_stamp(const Branch& br) {
  const Complex y = br.series_admittance;
  const Complex half = br.shunt_admittance_total * 0.5;
  const double t = br.tap;
  return {(y + half) / (t * t), -y / t, -y / t, y + half};
}

Eigen::MatrixXcd assemble_ybus(const PowerSystemCase& c, bool include_impedance_loads) {
  const auto n = Eigen::Index(c.buses.size());
  auto idx = index_buses(c);
  Eigen::MatrixXcd y = Eigen::MatrixXcd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) y(i, i) += c.buses[std::size_t(i)].shunt;
  for (const auto& br : c.branches) {
    auto f = idx.at(br.from_bus), t = idx.at(br.to_bus);
    auto s = branch_stamp(br);
    y(f, f) += s.ff;
    y(f, t) += s.ft;
    y(t, f) += s.tf;
    y(t, t) += s.tt;
  }
  if (include_impedance_loads) {
    auto yl = impedance_load_admittance(c);
    for (Eigen::Index i = 0; i < n; ++i) y(i, i) += yl(i);
  }
  return y;
}

Eigen::VectorXcd constant_power_load(const PowerSystemCase& c) {
  auto idx = index_buses(c);
  Eigen::VectorXcd s = Eigen::VectorXcd::Zero(Eigen::Index(c.buses.size()));
  for (const auto& l : c.loads) s(idx.at(l.bus)) += l.constant_power / c.base_mva;
  return s;
}

Eigen::VectorXcd impedance_load_admittance(const PowerSystemCase& c) {
  auto idx = index_buses(c);
  Eigen::VectorXcd y = Eigen::VectorXcd::Zero(Eigen::Index(c.buses.size()));
  for (const auto& l : c.loads) y(idx.at(l.bus)) += std::conj(l.constant_impedance) / c.base_mva;
  return y;
}

BusVoltageSolution solve_powerflow(const PowerSystemCase& c) {
  const auto n = Eigen::Index(c.buses.size());
  auto idx = index_buses(c);
  const Eigen::MatrixXcd y = assemble_ybus(c, true);
  const Eigen::VectorXcd s_load = constant_power_load(c);
  const Eigen::Index slack = idx.at(c.slack_bus);

  // Bus roles and specified injections.
  std::vector<int> gens_at(std::size_t(n), 0);
  Eigen::VectorXd vmag = Eigen::VectorXd::Ones(n);
  std::vector<char> vset_seen(std::size_t(n), 0);
  Eigen::VectorXd p_spec = -s_load.real();
  Eigen::VectorXd q_spec = -s_load.imag();
  for (const auto& g : c.generators) {
    auto b = idx.at(g.bus);
    ++gens_at[std::size_t(b)];
    p_spec(b) += g.p_gen / c.base_mva;
    if (!vset_seen[std::size_t(b)]) {
      vmag(b) = g.v_set;
      vset_seen[std::size_t(b)] = 1;
    }
  }
  std::vector<Eigen::Index> pvpq, pq;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (i == slack) continue;
    pvpq.push_back(i);
    if (gens_at[std::size_t(i)] == 0) pq.push_back(i);
  }
  const auto npvpq = Eigen::Index(pvpq.size());
  const auto npq = Eigen::Index(pq.size());

  Eigen::VectorXd vang = Eigen::VectorXd::Zero(n);
  auto voltages = [&] {
    Eigen::VectorXcd v(n);
    for (Eigen::Index i = 0; i < n; ++i) v(i) = std::polar(vmag(i), vang(i));
    return v;
  };
  auto mismatch = [&](const Eigen::VectorXcd& v, Eigen::VectorXd& f) {
    Eigen::VectorXcd s = v.cwiseProduct((y * v).conjugate());
    f.resize(npvpq + npq);
    for (Eigen::Index k = 0; k < npvpq; ++k) f(k) = s(pvpq[std::size_t(k)]).real() - p_spec(pvpq[std::size_t(k)]);
    for (Eigen::Index k = 0; k < npq; ++k) f(npvpq + k) = s(pq[std::size_t(k)]).imag() - q_spec(pq[std::size_t(k)]);
  };

  Eigen::VectorXd f;
  Eigen::VectorXcd v = voltages();
  mismatch(v, f);
  int iter = 0;
  bool polished = false;
  while (true) {
    double err = f.size() ? f.cwiseAbs().maxCoeff() : 0.0;
    if (!std::isfinite(err)) throw Error(ErrorKind::Divergence, "power flow produced non-finite mismatch");
    if (err <= kTolerance) {
      // One extra step takes the mismatch to rounding level.
      if (polished || f.size() == 0) break;
      polished = true;
    }
    if (iter >= kMaxIterations)
      throw Error(ErrorKind::Divergence,
                  "power flow did not converge in " + std::to_string(kMaxIterations) +
                      " iterations (mismatch " + std::to_string(err) + " pu)");
    ++iter;

    // dS/dVa = j diag(V) conj(diag(I) - Y diag(V)); dS/dVm = diag(V) conj(Y diag(V/|V|)) + conj(diag(I)) diag(V/|V|)
    Eigen::VectorXcd ibus = y * v;
    Eigen::VectorXcd vnorm(n);
    for (Eigen::Index i = 0; i < n; ++i) vnorm(i) = v(i) / std::abs(v(i));
    Eigen::MatrixXcd ds_dva = -(y * v.asDiagonal());
    ds_dva.diagonal() += ibus;
    ds_dva = (Complex(0, 1) * v.asDiagonal() * ds_dva.conjugate()).eval();
    Eigen::MatrixXcd ds_dvm = v.asDiagonal() * (y * vnorm.asDiagonal()).conjugate();
    ds_dvm.diagonal() += ibus.conjugate().cwiseProduct(vnorm);

    Eigen::MatrixXd jac(npvpq + npq, npvpq + npq);
    for (Eigen::Index r = 0; r < npvpq; ++r) {
      auto br = pvpq[std::size_t(r)];
      for (Eigen::Index k = 0; k < npvpq; ++k) jac(r, k) = ds_dva(br, pvpq[std::size_t(k)]).real();
      for (Eigen::Index k = 0; k < npq; ++k) jac(r, npvpq + k) = ds_dvm(br, pq[std::size_t(k)]).real();
    }
    for (Eigen::Index r = 0; r < npq; ++r) {
      auto br = pq[std::size_t(r)];
      for (Eigen::Index k = 0; k < npvpq; ++k) jac(npvpq + r, k) = ds_dva(br, pvpq[std::size_t(k)]).imag();
      for (Eigen::Index k = 0; k < npq; ++k) jac(npvpq + r, npvpq + k) = ds_dvm(br, pq[std::size_t(k)]).imag();
    }
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(jac);
    Eigen::VectorXd dx = lu.solve(-f);
    if (!dx.allFinite()) throw Error(ErrorKind::Divergence, "singular power-flow Jacobian");
    for (Eigen::Index k = 0; k < npvpq; ++k) vang(pvpq[std::size_t(k)]) += dx(k);
    for (Eigen::Index k = 0; k < npq; ++k) vmag(pq[std::size_t(k)]) += dx(npvpq + k);
    v = voltages();
    mismatch(v, f);
  }

  BusVoltageSolution sol;
  sol.iterations = iter;
  for (const auto& b : c.buses) sol.bus_ids.push_back(b.id);
  sol.voltage.assign(v.data(), v.data() + n);

  // Generator outputs: network injection plus local constant-power load,
  // shared by rating where the solve fixes only the bus total.
  Eigen::VectorXcd s_calc = v.cwiseProduct((y * v).conjugate());
  Eigen::VectorXcd s_gen_bus = s_calc + s_load;
  std::vector<double> rating_at(std::size_t(n), 0.0);
  for (const auto& g : c.generators) rating_at[std::size_t(idx.at(g.bus))] += g.rated_mva;
  for (const auto& g : c.generators) {
    auto b = idx.at(g.bus);
    double share = g.rated_mva / rating_at[std::size_t(b)];
    double p = (b == slack) ? s_gen_bus(b).real() * share : g.p_gen / c.base_mva;
    sol.generator_power.emplace_back(p, s_gen_bus(b).imag() * share);
  }
  for (const auto& br : c.branches) {
    auto f_i = idx.at(br.from_bus), t_i = idx.at(br.to_bus);
    auto st = branch_stamp(br);
    Complex i_f = st.ff * v(f_i) + st.ft * v(t_i);
    Complex i_t = st.tf * v(f_i) + st.tt * v(t_i);
    sol.branch_flows.push_back({br.id, v(f_i) * std::conj(i_f), v(t_i) * std::conj(i_t)});
  }
  sol.max_mismatch = powerflow_mismatch(c, sol);
  return sol;
}

double powerflow_mismatch(const PowerSystemCase& c, const BusVoltageSolution& sol) {
  const auto n = Eigen::Index(c.buses.size());
  auto idx = index_buses(c);
  const Eigen::MatrixXcd y = assemble_ybus(c, true);
  Eigen::VectorXcd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = sol.voltage[std::size_t(i)];
  Eigen::VectorXcd s = v.cwiseProduct((y * v).conjugate()) + constant_power_load(c);
  bool slack_has_gen = false;
  for (std::size_t k = 0; k < c.generators.size(); ++k) {
    s(idx.at(c.generators[k].bus)) -= sol.generator_power[k];
    slack_has_gen = slack_has_gen || c.generators[k].bus == c.slack_bus;
  }
  // A slack without machines is an infinite bus: it absorbs any imbalance.
  if (!slack_has_gen) s(idx.at(c.slack_bus)) = 0.0;
  return s.size() ? s.cwiseAbs().maxCoeff() : 0.0;
}

}  // namespace dyneq
