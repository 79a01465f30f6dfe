#include "dyneq/ctrlagg/frequency_response.hpp"

#include <cmath>
#include <numbers>

#include "dyneq/error.hpp"
#include "dyneq/simd/fr_kernels.hpp"

namespace dyneq::ctrlagg {

namespace {

constexpr double kPoleOnGrid = 1e-12;
constexpr double kNearZeroH21 = 1e-12;

void require_same_grid(const FrequencyResponse& a, const FrequencyResponse& b) {
  if (a.omega != b.omega)
    throw Error(ErrorKind::GridMismatch,
                "frequency grids differ ('" + a.source_label + "' vs '" + b.source_label + "')");
}

}  // namespace

void FrequencyResponse::check() const {
  if (omega.size() != samples.size())
    throw Error(ErrorKind::InvalidArgument, "frequency response: grid and sample lengths differ");
  for (std::size_t k = 0; k < omega.size(); ++k) {
    if (!(omega[k] > 0.0)) throw Error(ErrorKind::InvalidArgument, "frequency grid must be > 0");
    if (k > 0 && !(omega[k] > omega[k - 1]))
      throw Error(ErrorKind::InvalidArgument, "frequency grid must be strictly ascending");
    if (!std::isfinite(samples[k].real()) || !std::isfinite(samples[k].imag()))
      throw Error(ErrorKind::InvalidArgument, "frequency response has non-finite samples");
  }
}

std::vector<double> GridSpec::omega() const {
  if (!(lo_hz > 0.0) || !(hi_hz > lo_hz) || points < 2)
    throw Error(ErrorKind::InvalidArgument, "grid needs 0 < lo < hi and at least two points");
  std::vector<double> w(points);
  const double two_pi = 2.0 * std::numbers::pi;
  for (std::size_t k = 0; k < points; ++k) {
    const double t = double(k) / double(points - 1);
    const double f = logarithmic ? lo_hz * std::pow(hi_hz / lo_hz, t) : lo_hz + (hi_hz - lo_hz) * t;
    w[k] = two_pi * f;
  }
  w.back() = two_pi * hi_hz;
  return w;
}

FrequencyResponse evaluate_fr(const RationalTF& tf, std::span<const double> omega,
                              std::string label) {
  const auto& k = simd::active_kernels();
  const std::size_t n = omega.size();
  FrequencyResponse out{{omega.begin(), omega.end()}, std::vector<std::complex<double>>(n),
                        std::move(label)};
  std::vector<std::complex<double>> den(n);
  k.polyval_jw(tf.num().data(), tf.num().size(), omega.data(), out.samples.data(), n);
  k.polyval_jw(tf.den().data(), tf.den().size(), omega.data(), den.data(), n);
  for (std::size_t i = 0; i < n; ++i)
    if (std::abs(den[i]) < kPoleOnGrid)
      throw Error(ErrorKind::PoleOnGrid,
                  "denominator vanishes at omega = " + std::to_string(omega[i]) + " rad/s");
  k.cdiv(out.samples.data(), den.data(), out.samples.data(), n);
  return out;
}

FrequencyResponse evaluate_fr(const BlockChain& chain, std::span<const double> omega,
                              std::string label) {
  const auto& k = simd::active_kernels();
  FrequencyResponse out{{omega.begin(), omega.end()},
                        std::vector<std::complex<double>>(omega.size(), 1.0), std::move(label)};
  for (const auto& b : chain) {
    auto part = evaluate_fr(RationalTF::from_block(b), omega);
    k.cmul(out.samples.data(), part.samples.data(), out.samples.data(), out.size());
  }
  return out;
}

FrequencyResponse transform_input(const FrequencyResponse& h2, const FrequencyResponse& h21) {
  require_same_grid(h2, h21);
  for (std::size_t i = 0; i < h21.size(); ++i)
    if (std::abs(h21.samples[i]) < kNearZeroH21)
      throw Error(ErrorKind::NearZeroH21, "input relation '" + h21.source_label +
                                              "' nearly vanishes at omega = " +
                                              std::to_string(h21.omega[i]) + " rad/s");
  FrequencyResponse out{h2.omega, std::vector<std::complex<double>>(h2.size()),
                        h2.source_label + " / " + h21.source_label};
  simd::active_kernels().cdiv(h2.samples.data(), h21.samples.data(), out.samples.data(),
                              out.size());
  return out;
}

FrequencyResponse aggregate_frequency_responses(
    std::span<const std::pair<FrequencyResponse, double>> entries) {
  if (entries.empty()) throw Error(ErrorKind::EmptyList, "no responses to aggregate");
  double total = 0.0;
  for (const auto& [fr, rating] : entries) {
    if (!(rating > 0.0)) throw Error(ErrorKind::InvalidArgument, "rated_mva must be > 0");
    require_same_grid(entries.front().first, fr);
    total += rating;
  }
  FrequencyResponse out{entries.front().first.omega,
                        std::vector<std::complex<double>>(entries.front().first.size()),
                        "aggregate"};
  const auto& k = simd::active_kernels();
  for (const auto& [fr, rating] : entries)
    k.axpy(rating / total, fr.samples.data(), out.samples.data(), out.size());
  return out;
}

FrequencyResponse add(const FrequencyResponse& a, const FrequencyResponse& b) {
  require_same_grid(a, b);
  FrequencyResponse out = a;
  simd::active_kernels().axpy(1.0, b.samples.data(), out.samples.data(), out.size());
  out.source_label = a.source_label + " + " + b.source_label;
  return out;
}

double max_relative_error(const FrequencyResponse& a, const FrequencyResponse& b, double omega_lo,
                          double omega_hi) {
  require_same_grid(a, b);
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a.omega[i] < omega_lo || a.omega[i] > omega_hi) continue;
    const double ref = std::abs(b.samples[i]);
    const double err = std::abs(a.samples[i] - b.samples[i]);
    worst = std::max(worst, ref > 0.0 ? err / ref : err);
  }
  return worst;
}

}  // namespace dyneq::ctrlagg
