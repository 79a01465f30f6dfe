#pragma once

#include <complex>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "dyneq/ctrlagg/rational.hpp"
#include "dyneq/model/case.hpp"

namespace dyneq::ctrlagg {

// Complex samples of a SISO relation over an ascending, strictly positive
// angular-frequency grid (rad/s).
struct FrequencyResponse {
  std::vector<double> omega;
  std::vector<std::complex<double>> samples;
  std::string source_label;

  std::size_t size() const { return omega.size(); }
  // Throws InvalidArgument when the grid or samples break the invariants.
  void check() const;
};

struct GridSpec {
  double lo_hz = 0.01;
  double hi_hz = 10.0;
  std::size_t points = 200;
  bool logarithmic = true;

  std::vector<double> omega() const;  // rad/s
};

// Exact evaluation at s = j*omega. Throws PoleOnGrid when |D(j*omega)| < 1e-12.
FrequencyResponse evaluate_fr(const RationalTF& tf, std::span<const double> omega,
                              std::string label = {});
FrequencyResponse evaluate_fr(const BlockChain& chain, std::span<const double> omega,
                              std::string label = {});

// Re-express a response on another input: h1[k] = h2[k] / h21[k].
FrequencyResponse transform_input(const FrequencyResponse& h2, const FrequencyResponse& h21);

// Pointwise sum of responses weighted by rated_mva / sum(rated_mva).
FrequencyResponse aggregate_frequency_responses(
    std::span<const std::pair<FrequencyResponse, double>> entries);

// Pointwise sum of two responses on the same grid.
FrequencyResponse add(const FrequencyResponse& a, const FrequencyResponse& b);

// max_k |a[k] - b[k]| / |b[k]| over samples whose omega lies in [lo, hi].
double max_relative_error(const FrequencyResponse& a, const FrequencyResponse& b,
                          double omega_lo = 0.0, double omega_hi = 1e300);

}  // namespace dyneq::ctrlagg
