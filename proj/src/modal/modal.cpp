#include "dyneq/modal/modal.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <Eigen/Eigenvalues>

#include "dyneq/error.hpp"

namespace dyneq::modal {

LinearModel linearize(const PowerSystemCase& c, const BusVoltageSolution& sol,
                      dynamics::DynamicOptions opt) {
  dynamics::DynamicSystem sys(c, sol, opt);
  LinearModel m;
  const auto& x0 = sys.x0();
  m.a = sys.jacobian(x0);
  m.state_labels = sys.labels();
  const auto ng = c.generators.size();
  m.input_map = Eigen::MatrixXd::Zero(sys.size(), Eigen::Index(ng));
  m.output_map = Eigen::MatrixXd::Zero(Eigen::Index(2 * ng), sys.size());
  for (std::size_t g = 0; g < ng; ++g) {
    const auto& gen = c.generators[g];
    m.generator_ids.push_back(gen.id);
    m.omega_rows.push_back(sys.omega_index(g));
    m.input_map(sys.omega_index(g), Eigen::Index(g)) = 1.0 / (2.0 * gen.inertia_h);
    m.output_map.row(Eigen::Index(2 * g)) = sys.signal_gradient(x0, g, SignalKind::delta_omega);
    m.output_map.row(Eigen::Index(2 * g + 1)) = sys.signal_gradient(x0, g, SignalKind::delta_pe);
    m.output_labels.push_back(gen.id + ".delta_omega");
    m.output_labels.push_back(gen.id + ".delta_pe");
  }
  return m;
}

ModalResult eigenanalysis(const LinearModel& model) {
  if (!model.a.allFinite())
    throw Error(ErrorKind::InvalidArgument, "state matrix has non-finite entries");
  ModalResult r;
  r.generator_ids = model.generator_ids;
  r.omega_rows = model.omega_rows;
  if (model.a.rows() == 0) return r;
  Eigen::EigenSolver<Eigen::MatrixXd> es(model.a, true);
  if (es.info() != Eigen::Success)
    throw Error(ErrorKind::ConvergenceFailure, "eigenvalue iteration did not converge");
  r.eigenvalues = es.eigenvalues();
  r.right_eigenvectors = es.eigenvectors();
  for (Eigen::Index k = 0; k < r.size(); ++k) {
    const double nv = r.right_eigenvectors.col(k).norm();
    if (nv > 0.0) r.right_eigenvectors.col(k) /= nv;
    const auto lam = r.eigenvalues(k);
    r.frequency_hz.push_back(std::abs(lam.imag()) / (2.0 * std::numbers::pi));
    const double mag = std::abs(lam);
    r.damping_ratio.push_back(mag > 0.0 ? -lam.real() / mag : 1.0);
  }
  return r;
}

double max_eigen_residual(const LinearModel& model, const ModalResult& modal) {
  const Eigen::MatrixXcd a = model.a.cast<std::complex<double>>();
  double worst = 0.0;
  for (Eigen::Index k = 0; k < modal.size(); ++k) {
    const auto v = modal.right_eigenvectors.col(k);
    worst = std::max(worst, (a * v - modal.eigenvalues(k) * v).norm() / v.norm());
  }
  return worst;
}

std::vector<Eigen::Index> modes_in_band(const ModalResult& modal, double lo_hz, double hi_hz) {
  std::vector<Eigen::Index> out;
  for (Eigen::Index k = 0; k < modal.size(); ++k) {
    if (!(modal.eigenvalues(k).imag() > 0.0)) continue;
    const double f = modal.frequency_hz[std::size_t(k)];
    if (f >= lo_hz && f <= hi_hz) out.push_back(k);
  }
  std::sort(out.begin(), out.end(), [&](Eigen::Index a, Eigen::Index b) {
    const double za = modal.damping_ratio[std::size_t(a)], zb = modal.damping_ratio[std::size_t(b)];
    if (za != zb) return za < zb;
    return modal.frequency_hz[std::size_t(a)] < modal.frequency_hz[std::size_t(b)];
  });
  return out;
}

Eigen::Index select_mode(const ModalResult& modal, const ModeSelector& selector) {
  if (selector.mode_id) {
    const Eigen::Index k = *selector.mode_id;
    if (k < 0 || k >= modal.size())
      throw Error(ErrorKind::NoModeInBand, "mode id " + std::to_string(k) + " out of range");
    if (modal.eigenvalues(k).imag() == 0.0)
      throw Error(ErrorKind::InvalidArgument, "mode " + std::to_string(k) + " is not oscillatory");
    return k;
  }
  if (!(selector.lo_hz < selector.hi_hz))
    throw Error(ErrorKind::InvalidArgument, "mode band needs lo < hi");
  const auto hits = modes_in_band(modal, selector.lo_hz, selector.hi_hz);
  const std::string band =
      std::to_string(selector.lo_hz) + "-" + std::to_string(selector.hi_hz) + " Hz";
  if (hits.empty()) throw Error(ErrorKind::NoModeInBand, "no oscillatory mode in " + band);
  if (selector.strategy == ModeStrategy::unique && hits.size() > 1) {
    std::vector<std::string> details;
    for (auto k : hits)
      details.push_back("mode " + std::to_string(k) + ": " +
                        std::to_string(modal.frequency_hz[std::size_t(k)]) + " Hz");
    throw Error(ErrorKind::AmbiguousMode, std::to_string(hits.size()) + " modes in " + band,
                details);
  }
  return hits.front();
}

std::map<std::string, double> mode_shape_angles(const ModalResult& modal, Eigen::Index mode) {
  std::map<std::string, double> out;
  for (std::size_t g = 0; g < modal.generator_ids.size(); ++g) {
    const auto v = modal.right_eigenvectors(modal.omega_rows[g], mode);
    out[modal.generator_ids[g]] = std::arg(v) * 180.0 / std::numbers::pi;
  }
  return out;
}

namespace {

double circular_distance(double a, double b) {
  double d = std::fmod(std::abs(a - b), 360.0);
  return d > 180.0 ? 360.0 - d : d;
}

using Member = std::pair<double, std::string>;  // angle in [0, 360), id

void split_until_tight(std::vector<Member> arc, double tol,
                       std::vector<std::vector<std::string>>& out) {
  double widest = 0.0;
  for (std::size_t i = 0; i < arc.size(); ++i)
    for (std::size_t j = i + 1; j < arc.size(); ++j)
      widest = std::max(widest, circular_distance(arc[i].first, arc[j].first));
  if (widest <= tol || arc.size() == 1) {
    std::vector<std::string> ids;
    for (auto& m : arc) ids.push_back(m.second);
    out.push_back(std::move(ids));
    return;
  }
  // `arc` is ordered along the circle; cut at the widest internal gap (the
  // first one on ties, which is deterministic given the ordering).
  std::size_t cut = 1;
  double gap = -1.0;
  for (std::size_t i = 1; i < arc.size(); ++i) {
    double g = arc[i].first - arc[i - 1].first;
    if (g < 0.0) g += 360.0;
    if (g > gap) {
      gap = g;
      cut = i;
    }
  }
  split_until_tight({arc.begin(), arc.begin() + long(cut)}, tol, out);
  split_until_tight({arc.begin() + long(cut), arc.end()}, tol, out);
}

}  // namespace

std::vector<std::vector<std::string>> cluster_angles(const std::map<std::string, double>& angles,
                                                     double tolerance_deg) {
  if (tolerance_deg < 0.0) throw Error(ErrorKind::InvalidArgument, "angle tolerance must be >= 0");
  std::vector<Member> pts;
  for (const auto& [id, a] : angles) {
    double w = std::fmod(a, 360.0);
    if (w < 0.0) w += 360.0;
    pts.emplace_back(w, id);
  }
  std::sort(pts.begin(), pts.end());
  std::vector<std::vector<std::string>> groups;
  const std::size_t m = pts.size();
  if (m == 0) return groups;

  // gap[i] is the step from pts[i] to the next point around the circle.
  std::vector<double> gap(m);
  for (std::size_t i = 0; i < m; ++i)
    gap[i] = i + 1 < m ? pts[i + 1].first - pts[i].first : pts[0].first + 360.0 - pts[i].first;
  std::size_t start = 0;
  bool any_break = false;
  for (std::size_t i = 0; i < m; ++i)
    if (gap[i] > tolerance_deg) {
      start = (i + 1) % m;
      any_break = true;
      break;
    }
  if (m == 1) any_break = true;

  std::vector<Member> arc;
  for (std::size_t step = 0; step < m; ++step) {
    const std::size_t i = (start + step) % m;
    arc.push_back(pts[i]);
    const bool closes = any_break ? gap[i] > tolerance_deg : step + 1 == m;
    if (closes || step + 1 == m) {
      split_until_tight(arc, tolerance_deg, groups);
      arc.clear();
    }
  }
  for (auto& g : groups) std::sort(g.begin(), g.end());
  std::sort(groups.begin(), groups.end());
  return groups;
}

CoherencyGrouping find_coherent_groups(const ModalResult& modal, const ModeSelector& selector,
                                       const PowerSystemCase& c, double angle_tolerance_deg,
                                       GroupingScope scope) {
  CoherencyGrouping out;
  out.angle_tolerance_deg = angle_tolerance_deg;
  out.mode_index = select_mode(modal, selector);
  out.mode = modal.eigenvalues(out.mode_index);
  const auto all = mode_shape_angles(modal, out.mode_index);
  std::map<std::string, double> chosen;
  for (const auto& [id, a] : all) {
    const auto gi = c.generator_index(id);
    if (!gi) continue;
    const auto zone = c.bus(c.generators[*gi].bus).zone;
    if (scope == GroupingScope::all || zone == Zone::external) chosen[id] = a;
  }
  out.angle_deg = chosen;
  out.groups = cluster_angles(chosen, angle_tolerance_deg);
  return out;
}

}  // namespace dyneq::modal
