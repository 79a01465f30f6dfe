#include "dyneq/ctrlagg/fit.hpp"

#include <cmath>

#include <Eigen/Dense>

#include "dyneq/error.hpp"

namespace dyneq::ctrlagg {

std::string_view to_string(FitWeighting w) {
  return w == FitWeighting::uniform ? "uniform" : "inverse_magnitude";
}

FitWeighting fit_weighting_from_string(std::string_view s) {
  if (s == "uniform") return FitWeighting::uniform;
  if (s == "inverse_magnitude") return FitWeighting::inverse_magnitude;
  throw Error(ErrorKind::InvalidArgument, "unknown fit weighting '" + std::string(s) + "'");
}

FitReport fit_quality(const RationalTF& tf, const FrequencyResponse& target) {
  const auto fr = evaluate_fr(tf, target.omega);
  FitReport r;
  double sum = 0.0;
  for (std::size_t i = 0; i < target.size(); ++i) {
    const double ref = std::abs(target.samples[i]);
    const double err = std::abs(fr.samples[i] - target.samples[i]);
    const double rel = ref > 0.0 ? err / ref : err;
    r.max_rel_error = std::max(r.max_rel_error, rel);
    sum += rel * rel;
  }
  r.rms_rel_error = target.size() ? std::sqrt(sum / double(target.size())) : 0.0;
  return r;
}

FitResult fit_rational(const FrequencyResponse& target, int num_order, int den_order,
                       const FitOptions& options) {
  target.check();
  if (num_order < 0 || den_order < 0 || num_order > den_order)
    throw Error(ErrorKind::InvalidArgument, "fit orders must satisfy 0 <= num <= den");
  const std::size_t m = target.size();
  if (m < std::size_t(2 * (num_order + den_order + 2)))
    throw Error(ErrorKind::InvalidArgument,
                "grid too short for orders " + std::to_string(num_order) + "/" +
                    std::to_string(den_order));

  // Work in s' = s / w0 so the powers of j*omega stay near unit size.
  const double w0 = std::sqrt(target.omega.front() * target.omega.back());
  const int na = num_order + 1;
  const int nb = den_order;
  const int nu = na + nb;

  std::vector<std::complex<double>> sp(m);
  for (std::size_t i = 0; i < m; ++i) sp[i] = {0.0, target.omega[i] / w0};

  auto powers = [&](std::size_t i, int k) { return std::pow(sp[i], k); };

  Eigen::VectorXd a = Eigen::VectorXd::Zero(na), b = Eigen::VectorXd::Zero(nb);
  std::vector<double> base_w(m, 1.0);
  if (options.weighting == FitWeighting::inverse_magnitude)
    for (std::size_t i = 0; i < m; ++i) {
      const double mag = std::abs(target.samples[i]);
      base_w[i] = mag > 0.0 ? 1.0 / mag : 1.0;
    }

  std::vector<double> sk(m, 1.0);
  FitReport report;
  Eigen::VectorXd prev;
  for (int it = 0; it < std::max(1, options.max_iterations); ++it) {
    Eigen::MatrixXd A(2 * m, nu);
    Eigen::VectorXd rhs(2 * m);
    for (std::size_t i = 0; i < m; ++i) {
      const double w = base_w[i] * sk[i];
      const auto h = target.samples[i];
      for (int k = 0; k < na; ++k) {
        const auto v = w * powers(i, k);
        A(2 * i, k) = v.real();
        A(2 * i + 1, k) = v.imag();
      }
      for (int k = 1; k <= nb; ++k) {
        const auto v = -w * h * powers(i, k);
        A(2 * i, na + k - 1) = v.real();
        A(2 * i + 1, na + k - 1) = v.imag();
      }
      rhs(2 * i) = w * h.real();
      rhs(2 * i + 1) = w * h.imag();
    }
    Eigen::VectorXd scale(nu);
    for (int c = 0; c < nu; ++c) {
      const double n = A.col(c).norm();
      scale(c) = n > 0.0 ? 1.0 / n : 1.0;
      A.col(c) *= scale(c);
    }
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(A);
    qr.setThreshold(1e-13);
    if (qr.rank() < nu)
      throw Error(ErrorKind::RankDeficient,
                  "least-squares system has rank " + std::to_string(qr.rank()) + " < " +
                      std::to_string(nu) + " for orders " + std::to_string(num_order) + "/" +
                      std::to_string(den_order));
    Eigen::VectorXd x = qr.solve(rhs).cwiseProduct(scale);
    a = x.head(na);
    b = x.tail(nb);
    report.iterations = it + 1;
    if (prev.size() == x.size()) {
      const double change = (x - prev).norm() / std::max(1.0, x.norm());
      if (change < options.tolerance) {
        report.converged = true;
        break;
      }
    }
    prev = x;
    // Sanathanan-Koerner: divide by the previous denominator magnitude.
    for (std::size_t i = 0; i < m; ++i) {
      std::complex<double> d = 1.0;
      for (int k = 1; k <= nb; ++k) d += b(k - 1) * powers(i, k);
      const double mag = std::abs(d);
      sk[i] = mag > 0.0 ? 1.0 / mag : 1.0;
    }
  }

  std::vector<double> num(static_cast<std::size_t>(na)), den(static_cast<std::size_t>(nb) + 1);
  for (int k = 0; k < na; ++k) num[std::size_t(k)] = a(k) / std::pow(w0, k);
  den[0] = 1.0;
  for (int k = 1; k <= nb; ++k) den[std::size_t(k)] = b(k - 1) / std::pow(w0, k);
  RationalTF tf(std::move(num), std::move(den));

  if (!options.force) {
    for (const auto& p : tf.poles())
      if (p.real() >= 0.0)
        throw Error(ErrorKind::UnstableFit,
                    "fitted denominator has a pole at " + std::to_string(p.real()) +
                        (p.imag() >= 0 ? "+" : "") + std::to_string(p.imag()) + "j");
  }
  const auto q = fit_quality(tf, target);
  report.max_rel_error = q.max_rel_error;
  report.rms_rel_error = q.rms_rel_error;
  return {std::move(tf), report};
}

}  // namespace dyneq::ctrlagg
