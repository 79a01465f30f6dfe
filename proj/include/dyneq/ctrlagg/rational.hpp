#pragma once

#include <complex>
#include <vector>

#include "dyneq/model/case.hpp"

namespace dyneq::ctrlagg {

// Ascending-power polynomial helpers.
std::vector<double> poly_trim(std::vector<double> p);
std::vector<double> poly_mul(const std::vector<double>& a, const std::vector<double>& b);
std::vector<double> poly_add(const std::vector<double>& a, const std::vector<double>& b);
std::vector<double> poly_scale(const std::vector<double>& a, double k);
int poly_degree(const std::vector<double>& p);

// Real-coefficient rational transfer function N(s)/D(s), coefficients in
// ascending powers of s. The constant denominator coefficient is normalized
// to 1 whenever it is nonzero. Improper functions (deg N > deg D) are legal
// only when `improper_ok` is set; they appear as intermediate input relations
// such as -2Hs, never as fitted equivalents.
class RationalTF {
 public:
  RationalTF() : num_{0.0}, den_{1.0} {}
  RationalTF(std::vector<double> num, std::vector<double> den, bool improper_ok = false);

  static RationalTF constant(double k) { return RationalTF({k}, {1.0}); }
  static RationalTF from_block(const Block& b);
  static RationalTF from_chain(const BlockChain& chain);

  const std::vector<double>& num() const { return num_; }
  const std::vector<double>& den() const { return den_; }
  bool improper_ok() const { return improper_ok_; }
  int num_degree() const { return poly_degree(num_); }
  int den_degree() const { return poly_degree(den_); }
  bool is_proper() const { return num_degree() <= den_degree(); }

  std::complex<double> evaluate(std::complex<double> s) const;
  std::vector<std::complex<double>> poles() const;
  std::vector<std::complex<double>> zeros() const;

  friend RationalTF operator*(const RationalTF& a, const RationalTF& b);
  friend RationalTF operator+(const RationalTF& a, const RationalTF& b);
  RationalTF scaled(double k) const;

  bool operator==(const RationalTF&) const = default;

 private:
  std::vector<double> num_;
  std::vector<double> den_;
  bool improper_ok_ = false;
};

// Roots of an ascending-coefficient polynomial (companion eigenvalues).
std::vector<std::complex<double>> poly_roots(const std::vector<double>& p);

}  // namespace dyneq::ctrlagg
