#include "dyneq/dynamics/dynamic_system.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "dyneq/error.hpp"

namespace dyneq::dynamics {

namespace {

constexpr Complex kJ{0.0, 1.0};

std::size_t sig_index(SignalKind s) { return std::size_t(s); }

}  // namespace

struct DynamicSystem::Core {
  std::vector<Complex> e;
  Eigen::VectorXcd v;
  std::vector<Complex> i;
  std::vector<double> pe, vt, id;
  std::vector<std::array<double, kSignalCount>> sig;
  std::vector<double> ctl_out;  // case controller order
  Eigen::VectorXd f;
};

DynamicSystem::DynamicSystem(const PowerSystemCase& c, const BusVoltageSolution& sol,
                             DynamicOptions opt)
    : case_(c), sol_(sol), opt_(opt) {
  omega_s_ = 2.0 * std::numbers::pi * c.frequency_hz;
  const auto slack = c.bus_index(c.slack_bus);
  if (!slack) throw Error(ErrorKind::InvalidArgument, "slack bus missing");
  bool slack_has_gen = false;
  for (const auto& g : c.generators) slack_has_gen |= g.bus == c.slack_bus;
  if (!slack_has_gen) inf_bus_ = long(*slack);

  Eigen::Index off = 0;
  for (const auto& g : c.generators) {
    Machine m;
    m.bus = *c.bus_index(g.bus);
    m.offset = off;
    m.one_axis = opt.one_axis && g.xd && g.tdo_prime;
    m.x_sys = g.xd_prime_sys(c.base_mva);
    m.to_mach = c.base_mva / g.rated_mva;
    m.h = g.inertia_h;
    m.d = g.damping_d;
    if (m.one_axis) {
      m.xd_diff = *g.xd - g.xd_prime;
      m.tdo = *g.tdo_prime;
    }
    labels_.push_back({g.id, "delta"});
    labels_.push_back({g.id, "delta_omega"});
    if (m.one_axis) labels_.push_back({g.id, "eq_prime"});
    off += m.one_axis ? 3 : 2;
    machines_.push_back(m);
  }
  for (std::size_t k = 0; k < c.controllers.size(); ++k) {
    const auto& ctl = c.controllers[k];
    Ctl x;
    x.index = k;
    bool found = false;
    for (std::size_t g = 0; g < c.generators.size() && !found; ++g) {
      const auto& owned = c.generators[g].controllers;
      if (std::find(owned.begin(), owned.end(), ctl.id) != owned.end()) {
        x.gen = g;
        found = true;
      }
    }
    if (!found)
      throw Error(ErrorKind::InvalidArgument, "controller " + ctl.id + " has no generator");
    x.ss = realize(ctl);
    x.offset = off;
    x.inputs = ctl.input_signals;
    x.output = ctl.output_signal;
    for (Eigen::Index s = 0; s < x.ss.states(); ++s)
      labels_.push_back({ctl.id, "x" + std::to_string(s)});
    off += x.ss.states();
    controllers_.push_back(std::move(x));
  }
  std::stable_sort(controllers_.begin(), controllers_.end(), [&](const Ctl& a, const Ctl& b) {
    return controller_stage(c.controllers[a.index].kind) <
           controller_stage(c.controllers[b.index].kind);
  });
  n_ = off;

  // Network with loads frozen as admittances at the solved voltages.
  y_base_ = assemble_ybus(c, true);
  const auto pq = constant_power_load(c);
  for (Eigen::Index b = 0; b < y_base_.rows(); ++b) {
    const double vm2 = std::norm(sol.voltage[std::size_t(b)]);
    y_base_(b, b) += std::conj(pq(b)) / vm2;
  }
  build_network();

  // Internal EMFs from the solved injections.
  x0_ = Eigen::VectorXd::Zero(n_);
  for (std::size_t g = 0; g < machines_.size(); ++g) {
    auto& m = machines_[g];
    const Complex v = sol.voltage[m.bus];
    const Complex i = std::conj(sol.generator_power[g] / v);
    const Complex e = v + kJ * m.x_sys * i;
    x0_(m.offset) = std::arg(e);
    m.e0 = std::abs(e);
    if (m.one_axis) x0_(m.offset + 2) = std::abs(e);
  }
  // Set-points from the dynamic network itself so f(x0) vanishes to rounding.
  for (auto& m : machines_) m.pm0 = m.efd0 = m.pe0 = m.vt0 = 0.0;
  Core core;
  compute(x0_, core);
  for (std::size_t g = 0; g < machines_.size(); ++g) {
    auto& m = machines_[g];
    m.pe0 = core.pe[g];
    m.pm0 = core.pe[g] * m.to_mach;
    m.vt0 = core.vt[g];
    if (m.one_axis) m.efd0 = x0_(m.offset + 2) + m.xd_diff * core.id[g];
  }
}

void DynamicSystem::set_network(const NetworkChange& change) {
  change_ = change;
  build_network();
}

void DynamicSystem::build_network() {
  const auto& c = case_;
  Eigen::MatrixXcd y = y_base_;
  for (const auto& [bus, adm] : change_.bus_shunts) {
    const auto b = c.bus_index(bus);
    if (!b) throw Error(ErrorKind::InvalidArgument, "event bus '" + bus + "' not in case");
    y(Eigen::Index(*b), Eigen::Index(*b)) += adm;
  }
  for (const auto& id : change_.tripped_branches) {
    auto it = std::find_if(c.branches.begin(), c.branches.end(),
                           [&](const Branch& br) { return br.id == id; });
    if (it == c.branches.end())
      throw Error(ErrorKind::InvalidArgument, "event branch '" + id + "' not in case");
    const auto st = branch_stamp(*it);
    const auto f = Eigen::Index(*c.bus_index(it->from_bus));
    const auto t = Eigen::Index(*c.bus_index(it->to_bus));
    y(f, f) -= st.ff;
    y(f, t) -= st.ft;
    y(t, f) -= st.tf;
    y(t, t) -= st.tt;
  }
  net_.y_net = y;

  const Eigen::Index nb = y.rows();
  Eigen::MatrixXcd yaug = y;
  for (const auto& m : machines_) {
    const auto b = Eigen::Index(m.bus);
    yaug(b, b) += 1.0 / (kJ * m.x_sys);
  }
  std::vector<Eigen::Index> free;
  for (Eigen::Index b = 0; b < nb; ++b)
    if (b != inf_bus_) free.push_back(b);
  const Eigen::Index nf = Eigen::Index(free.size());
  Eigen::MatrixXcd yff(nf, nf);
  for (Eigen::Index r = 0; r < nf; ++r)
    for (Eigen::Index k = 0; k < nf; ++k) yff(r, k) = yaug(free[std::size_t(r)], free[std::size_t(k)]);
  Eigen::FullPivLU<Eigen::MatrixXcd> lu(yff);
  if (!lu.isInvertible())
    throw Error(ErrorKind::SingularNetwork, "network admittance matrix is singular");

  net_.v0 = Eigen::VectorXcd::Zero(nb);
  net_.cmat = Eigen::MatrixXcd::Zero(nb, Eigen::Index(machines_.size()));
  std::vector<Eigen::Index> pos(std::size_t(nb), -1);
  for (Eigen::Index r = 0; r < nf; ++r) pos[std::size_t(free[std::size_t(r)])] = r;
  if (inf_bus_ >= 0) {
    const Complex vi = sol_.voltage[std::size_t(inf_bus_)];
    Eigen::VectorXcd rhs(nf);
    for (Eigen::Index r = 0; r < nf; ++r) rhs(r) = -yaug(free[std::size_t(r)], inf_bus_) * vi;
    Eigen::VectorXcd vf = lu.solve(rhs);
    for (Eigen::Index r = 0; r < nf; ++r) net_.v0(free[std::size_t(r)]) = vf(r);
    net_.v0(inf_bus_) = vi;
  }
  for (std::size_t g = 0; g < machines_.size(); ++g) {
    Eigen::VectorXcd rhs = Eigen::VectorXcd::Zero(nf);
    rhs(pos[machines_[g].bus]) = 1.0 / (kJ * machines_[g].x_sys);
    Eigen::VectorXcd col = lu.solve(rhs);
    for (Eigen::Index r = 0; r < nf; ++r) net_.cmat(free[std::size_t(r)], Eigen::Index(g)) = col(r);
  }
}

void DynamicSystem::compute(const Eigen::VectorXd& x, Core& core) const {
  const std::size_t ng = machines_.size();
  core.e.resize(ng);
  for (std::size_t g = 0; g < ng; ++g) {
    const auto& m = machines_[g];
    const double mag = m.one_axis ? x(m.offset + 2) : m.e0;
    core.e[g] = std::polar(mag, x(m.offset));
  }
  core.v = net_.v0;
  for (std::size_t g = 0; g < ng; ++g) core.v += net_.cmat.col(Eigen::Index(g)) * core.e[g];

  core.i.resize(ng);
  core.pe.resize(ng);
  core.vt.resize(ng);
  core.id.resize(ng);
  core.sig.assign(ng, {});
  for (std::size_t g = 0; g < ng; ++g) {
    const auto& m = machines_[g];
    const Complex vb = core.v(Eigen::Index(m.bus));
    core.i[g] = (core.e[g] - vb) / (kJ * m.x_sys);
    core.pe[g] = std::real(core.e[g] * std::conj(core.i[g]));
    core.vt[g] = std::abs(vb);
    core.id[g] = -std::imag(core.i[g] * std::polar(1.0, -x(m.offset))) * m.to_mach;
    auto& s = core.sig[g];
    s[sig_index(SignalKind::delta_omega)] = x(m.offset + 1);
    s[sig_index(SignalKind::delta_pe)] = (core.pe[g] - m.pe0) * m.to_mach;
    s[sig_index(SignalKind::delta_vt)] = core.vt[g] - m.vt0;
  }

  core.f.setZero(n_);
  core.ctl_out.assign(case_.controllers.size(), 0.0);
  // Written out element by element; this runs several times per step.
  for (const auto& c : controllers_) {
    const Eigen::Index k = c.ss.states();
    const auto& sg = core.sig[c.gen];
    double y = 0.0;
    for (Eigen::Index r = 0; r < k; ++r) {
      double dx = 0.0;
      for (Eigen::Index q = 0; q < k; ++q) dx += c.ss.a(r, q) * x(c.offset + q);
      core.f(c.offset + r) = dx;
      y += c.ss.c(0, r) * x(c.offset + r);
    }
    for (std::size_t p = 0; p < c.inputs.size(); ++p) {
      const double u = sg[sig_index(c.inputs[p])];
      y += c.ss.d(0, Eigen::Index(p)) * u;
      for (Eigen::Index r = 0; r < k; ++r) core.f(c.offset + r) += c.ss.b(r, Eigen::Index(p)) * u;
    }
    core.ctl_out[c.index] = y;
    core.sig[c.gen][sig_index(c.output)] += y;
  }

  for (std::size_t g = 0; g < ng; ++g) {
    const auto& m = machines_[g];
    const auto& s = core.sig[g];
    const double dw = x(m.offset + 1);
    core.f(m.offset) = omega_s_ * dw;
    const double pm = m.pm0 + s[sig_index(SignalKind::delta_pmech)];
    core.f(m.offset + 1) = (pm - core.pe[g] * m.to_mach - m.d * dw) / (2.0 * m.h);
    if (m.one_axis) {
      const double efd = m.efd0 + s[sig_index(SignalKind::efd)];
      core.f(m.offset + 2) = (efd - x(m.offset + 2) - m.xd_diff * core.id[g]) / m.tdo;
    }
  }
}

Eigen::VectorXd DynamicSystem::f(const Eigen::VectorXd& x) const {
  thread_local Core core;
  compute(x, core);
  return core.f;
}

Snapshot DynamicSystem::evaluate(const Eigen::VectorXd& x) const {
  Snapshot s;
  evaluate(x, s);
  return s;
}

void DynamicSystem::evaluate(const Eigen::VectorXd& x, Snapshot& s) const {
  thread_local Core core;
  compute(x, core);
  s.f = core.f;
  s.emf = core.e;
  s.current = core.i;
  s.pe = core.pe;
  s.vt = core.vt;
  s.signals = core.sig;
  s.controller_output = core.ctl_out;
  s.bus_voltage = core.v;
  double consumed = 0.0;
  for (Eigen::Index b = 0; b < core.v.size(); ++b) {
    if (b == inf_bus_) continue;
    const Complex inj = net_.y_net.row(b).transpose().cwiseProduct(core.v).sum();
    consumed += std::real(core.v(b) * std::conj(inj));
  }
  double produced = 0.0;
  for (double p : core.pe) produced += p;
  s.balance_residual = std::abs(produced - consumed);
}

void DynamicSystem::signal_rows(const Eigen::VectorXd& x, const Core& core,
                                std::vector<std::array<Eigen::RowVectorXd, kSignalCount>>& rows,
                                Eigen::MatrixXd* jac) const {
  const std::size_t ng = machines_.size();
  Eigen::MatrixXd dpe = Eigen::MatrixXd::Zero(Eigen::Index(ng), n_);
  Eigen::MatrixXd dvt = dpe, did = dpe;

  // Perturb each EMF along its angle and magnitude and carry the change
  // through the network.
  for (std::size_t j = 0; j < ng; ++j) {
    const auto& mj = machines_[j];
    for (int which = 0; which < (mj.one_axis ? 2 : 1); ++which) {
      const Eigen::Index col = which == 0 ? mj.offset : mj.offset + 2;
      const Complex de = which == 0 ? kJ * core.e[j] : std::polar(1.0, x(mj.offset));
      for (std::size_t k = 0; k < ng; ++k) {
        const auto& mk = machines_[k];
        const Complex dv = net_.cmat(Eigen::Index(mk.bus), Eigen::Index(j)) * de;
        const Complex dek = k == j ? de : Complex{};
        const Complex di = (dek - dv) / (kJ * mk.x_sys);
        dpe(Eigen::Index(k), col) = std::real(dek * std::conj(core.i[k]) + core.e[k] * std::conj(di));
        const Complex vb = core.v(Eigen::Index(mk.bus));
        dvt(Eigen::Index(k), col) = std::real(std::conj(vb) * dv) / std::max(std::abs(vb), 1e-300);
        const Complex rot = std::polar(1.0, -x(mk.offset));
        Complex d_rot_i = di * rot;
        if (k == j && which == 0) d_rot_i += core.i[k] * (-kJ) * rot;
        did(Eigen::Index(k), col) = -std::imag(d_rot_i) * mk.to_mach;
      }
    }
  }

  rows.assign(ng, {});
  for (auto& r : rows)
    for (auto& v : r) v = Eigen::RowVectorXd::Zero(n_);
  for (std::size_t g = 0; g < ng; ++g) {
    const auto& m = machines_[g];
    rows[g][sig_index(SignalKind::delta_omega)](m.offset + 1) = 1.0;
    rows[g][sig_index(SignalKind::delta_pe)] = dpe.row(Eigen::Index(g)) * m.to_mach;
    rows[g][sig_index(SignalKind::delta_vt)] = dvt.row(Eigen::Index(g));
  }
  for (const auto& c : controllers_) {
    const Eigen::Index k = c.ss.states();
    Eigen::RowVectorXd y = Eigen::RowVectorXd::Zero(n_);
    y.segment(c.offset, k) = c.ss.c.row(0);
    Eigen::MatrixXd frows = Eigen::MatrixXd::Zero(k, n_);
    frows.block(0, c.offset, k, k) = c.ss.a;
    for (std::size_t p = 0; p < c.inputs.size(); ++p) {
      const Eigen::RowVectorXd& u = rows[c.gen][sig_index(c.inputs[p])];
      y += c.ss.d(0, Eigen::Index(p)) * u;
      frows += c.ss.b.col(Eigen::Index(p)) * u;
    }
    rows[c.gen][sig_index(c.output)] += y;
    if (jac) jac->middleRows(c.offset, k) = frows;
  }
  if (!jac) return;
  for (std::size_t g = 0; g < ng; ++g) {
    const auto& m = machines_[g];
    const auto& r = rows[g];
    jac->row(m.offset).setZero();
    (*jac)(m.offset, m.offset + 1) = omega_s_;
    Eigen::RowVectorXd w = r[sig_index(SignalKind::delta_pmech)] - dpe.row(Eigen::Index(g)) * m.to_mach;
    w(m.offset + 1) -= m.d;
    jac->row(m.offset + 1) = w / (2.0 * m.h);
    if (m.one_axis) {
      Eigen::RowVectorXd q = r[sig_index(SignalKind::efd)] - m.xd_diff * did.row(Eigen::Index(g));
      q(m.offset + 2) -= 1.0;
      jac->row(m.offset + 2) = q / m.tdo;
    }
  }
}

Eigen::MatrixXd DynamicSystem::jacobian(const Eigen::VectorXd& x) const {
  Core core;
  compute(x, core);
  Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(n_, n_);
  std::vector<std::array<Eigen::RowVectorXd, kSignalCount>> rows;
  signal_rows(x, core, rows, &jac);
  return jac;
}

Eigen::RowVectorXd DynamicSystem::signal_gradient(const Eigen::VectorXd& x, std::size_t g,
                                                  SignalKind s) const {
  Core core;
  compute(x, core);
  std::vector<std::array<Eigen::RowVectorXd, kSignalCount>> rows;
  signal_rows(x, core, rows, nullptr);
  return rows.at(g)[sig_index(s)];
}

Eigen::MatrixXd finite_difference_jacobian(const DynamicSystem& sys, const Eigen::VectorXd& x,
                                           double step) {
  const Eigen::Index n = sys.size();
  Eigen::MatrixXd jac(n, n);
  Eigen::VectorXd xp = x, xm = x;
  for (Eigen::Index k = 0; k < n; ++k) {
    const double h = step * std::max(1.0, std::abs(x(k)));
    xp(k) = x(k) + h;
    xm(k) = x(k) - h;
    jac.col(k) = (sys.f(xp) - sys.f(xm)) / (2.0 * h);
    xp(k) = xm(k) = x(k);
  }
  return jac;
}

}  // namespace dyneq::dynamics
