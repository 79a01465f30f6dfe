#include "dyneq/netred/admittance.hpp"

#include <algorithm>
#include <set>

#include "dyneq/error.hpp"

namespace dyneq::netred {

std::optional<Eigen::Index> AdmittanceMatrix::index(const std::string& id) const {
  auto it = std::find(bus_ids.begin(), bus_ids.end(), id);
  if (it == bus_ids.end()) return std::nullopt;
  return Eigen::Index(it - bus_ids.begin());
}

AdmittanceMatrix build_admittance(const PowerSystemCase& c, const BusVoltageSolution* sol) {
  AdmittanceMatrix out;
  out.y = assemble_ybus(c, true);
  const auto pq = constant_power_load(c);
  for (Eigen::Index b = 0; b < pq.size(); ++b) {
    const double vm2 = sol ? std::norm(sol->voltage[std::size_t(b)]) : 1.0;
    out.y(b, b) += std::conj(pq(b)) / vm2;
  }
  for (const auto& b : c.buses) out.bus_ids.push_back(b.id);
  return out;
}

AdmittanceMatrix kron_eliminate(const AdmittanceMatrix& y, const std::vector<std::string>& keep) {
  std::vector<Eigen::Index> k, e;
  std::set<std::string> keep_set(keep.begin(), keep.end());
  for (const auto& id : keep) {
    auto i = y.index(id);
    if (!i) throw Error(ErrorKind::InvalidArgument, "kept bus '" + id + "' not in matrix");
    k.push_back(*i);
  }
  for (std::size_t i = 0; i < y.bus_ids.size(); ++i)
    if (!keep_set.count(y.bus_ids[i])) e.push_back(Eigen::Index(i));

  const Eigen::Index nk = Eigen::Index(k.size()), ne = Eigen::Index(e.size());
  AdmittanceMatrix out;
  out.bus_ids = keep;
  out.y.resize(nk, nk);
  for (Eigen::Index r = 0; r < nk; ++r)
    for (Eigen::Index s = 0; s < nk; ++s) out.y(r, s) = y.y(k[std::size_t(r)], k[std::size_t(s)]);
  if (ne == 0) return out;

  Eigen::MatrixXcd yee(ne, ne), yke(nk, ne), yek(ne, nk);
  for (Eigen::Index r = 0; r < ne; ++r)
    for (Eigen::Index s = 0; s < ne; ++s) yee(r, s) = y.y(e[std::size_t(r)], e[std::size_t(s)]);
  for (Eigen::Index r = 0; r < nk; ++r)
    for (Eigen::Index s = 0; s < ne; ++s) {
      yke(r, s) = y.y(k[std::size_t(r)], e[std::size_t(s)]);
      yek(s, r) = y.y(e[std::size_t(s)], k[std::size_t(r)]);
    }
  Eigen::FullPivLU<Eigen::MatrixXcd> lu(yee);
  lu.setThreshold(1e-12);
  if (!lu.isInvertible()) {
    const Eigen::MatrixXcd ker = lu.kernel();
    std::vector<std::string> names;
    for (Eigen::Index r = 0; r < ne; ++r)
      if (ker.row(r).norm() > 1e-9 * ker.norm()) names.push_back(y.bus_ids[std::size_t(e[std::size_t(r)])]);
    std::string msg = "eliminated block is singular; buses:";
    for (const auto& n : names) msg += " " + n;
    throw Error(ErrorKind::SingularSubmatrix, msg, names);
  }
  out.y -= yke * lu.solve(yek);
  return out;
}

Complex transfer_impedance(const AdmittanceMatrix& y, const std::string& i, const std::string& j) {
  const auto a = y.index(i), b = y.index(j);
  if (!a || !b) throw Error(ErrorKind::InvalidArgument, "bus not in matrix");
  Eigen::VectorXcd rhs = Eigen::VectorXcd::Zero(y.y.rows());
  rhs(*b) = 1.0;
  return y.y.fullPivLu().solve(rhs)(*a);
}

}  // namespace dyneq::netred
