#include "dyneq/ctrlagg/rational.hpp"

#include <algorithm>

#include <Eigen/Eigenvalues>

#include "dyneq/error.hpp"

namespace dyneq::ctrlagg {

std::vector<double> poly_trim(std::vector<double> p) {
  while (p.size() > 1 && p.back() == 0.0) p.pop_back();
  if (p.empty()) p.push_back(0.0);
  return p;
}

int poly_degree(const std::vector<double>& p) {
  int d = int(p.size()) - 1;
  while (d > 0 && p[std::size_t(d)] == 0.0) --d;
  return std::max(d, 0);
}

std::vector<double> poly_mul(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.empty() || b.empty()) return {0.0};
  std::vector<double> out(a.size() + b.size() - 1, 0.0);
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j) out[i + j] += a[i] * b[j];
  return poly_trim(std::move(out));
}

std::vector<double> poly_add(const std::vector<double>& a, const std::vector<double>& b) {
  std::vector<double> out(std::max(a.size(), b.size()), 0.0);
  for (std::size_t i = 0; i < a.size(); ++i) out[i] += a[i];
  for (std::size_t i = 0; i < b.size(); ++i) out[i] += b[i];
  return poly_trim(std::move(out));
}

std::vector<double> poly_scale(const std::vector<double>& a, double k) {
  std::vector<double> out(a);
  for (auto& v : out) v *= k;
  return poly_trim(std::move(out));
}

std::vector<std::complex<double>> poly_roots(const std::vector<double>& p) {
  auto q = poly_trim(p);
  const int n = poly_degree(q);
  std::vector<std::complex<double>> roots;
  // Roots at the origin first, then the companion matrix of the rest.
  std::size_t lead_zero = 0;
  while (lead_zero < q.size() - 1 && q[lead_zero] == 0.0) ++lead_zero;
  for (std::size_t i = 0; i < lead_zero; ++i) roots.emplace_back(0.0, 0.0);
  const int m = n - int(lead_zero);
  if (m <= 0) return roots;
  Eigen::MatrixXd comp = Eigen::MatrixXd::Zero(m, m);
  const double lead = q[std::size_t(n)];
  for (int i = 1; i < m; ++i) comp(i, i - 1) = 1.0;
  for (int i = 0; i < m; ++i) comp(i, m - 1) = -q[lead_zero + std::size_t(i)] / lead;
  Eigen::EigenSolver<Eigen::MatrixXd> es(comp, false);
  for (int i = 0; i < m; ++i) roots.push_back(es.eigenvalues()(i));
  return roots;
}

RationalTF::RationalTF(std::vector<double> num, std::vector<double> den, bool improper_ok)
    : num_(poly_trim(std::move(num))), den_(poly_trim(std::move(den))), improper_ok_(improper_ok) {
  if (std::all_of(den_.begin(), den_.end(), [](double v) { return v == 0.0; }))
    throw Error(ErrorKind::InvalidArgument, "transfer function denominator is zero");
  if (den_.front() != 0.0 && den_.front() != 1.0) {
    const double k = den_.front();
    for (auto& v : num_) v /= k;
    for (auto& v : den_) v /= k;
  }
  if (!improper_ok_ && !is_proper())
    throw Error(ErrorKind::InvalidArgument, "improper transfer function not flagged as such");
}

RationalTF RationalTF::from_block(const Block& b) {
  switch (b.type) {
    case BlockType::gain: return RationalTF({b.param("k", 1.0)}, {1.0});
    case BlockType::lag: return RationalTF({b.param("k", 1.0)}, {1.0, b.param("t", 0.0)});
    case BlockType::leadlag: {
      const double k = b.param("k", 1.0);
      return RationalTF({k, k * b.param("t1", 0.0)}, {1.0, b.param("t2", 0.0)});
    }
    case BlockType::washout: {
      const double t = b.param("t", 1.0);
      return RationalTF({0.0, b.param("k", 1.0) * t}, {1.0, t});
    }
    case BlockType::integrator: return RationalTF({b.param("k", 1.0)}, {0.0, 1.0});
    case BlockType::pi: return RationalTF({b.param("ki", 0.0), b.param("kp", 0.0)}, {0.0, 1.0});
    case BlockType::tf: return RationalTF(b.num, b.den);
  }
  throw Error(ErrorKind::InvalidArgument, "unknown block type");
}

RationalTF RationalTF::from_chain(const BlockChain& chain) {
  RationalTF out = constant(1.0);
  for (const auto& b : chain) out = out * from_block(b);
  return out;
}

std::complex<double> RationalTF::evaluate(std::complex<double> s) const {
  auto horner = [s](const std::vector<double>& p) {
    std::complex<double> acc = 0.0;
    for (std::size_t k = p.size(); k-- > 0;) acc = acc * s + p[k];
    return acc;
  };
  return horner(num_) / horner(den_);
}

std::vector<std::complex<double>> RationalTF::poles() const { return poly_roots(den_); }
std::vector<std::complex<double>> RationalTF::zeros() const { return poly_roots(num_); }

RationalTF operator*(const RationalTF& a, const RationalTF& b) {
  return RationalTF(poly_mul(a.num_, b.num_), poly_mul(a.den_, b.den_),
                    a.improper_ok_ || b.improper_ok_);
}

RationalTF operator+(const RationalTF& a, const RationalTF& b) {
  if (a.den_ == b.den_)
    return RationalTF(poly_add(a.num_, b.num_), a.den_, a.improper_ok_ || b.improper_ok_);
  return RationalTF(poly_add(poly_mul(a.num_, b.den_), poly_mul(b.num_, a.den_)),
                    poly_mul(a.den_, b.den_), a.improper_ok_ || b.improper_ok_);
}

RationalTF RationalTF::scaled(double k) const {
  return RationalTF(poly_scale(num_, k), den_, improper_ok_);
}

}  // namespace dyneq::ctrlagg
