#include "dyneq/simd/fr_kernels.hpp"

namespace dyneq::simd {

namespace {

// Operation order here is the reference the vector kernels reproduce.

void polyval_jw_scalar(const double* coeffs, std::size_t ncoeffs, const double* omega,
                       cdouble* out, std::size_t n) {
  if (ncoeffs == 0) {
    for (std::size_t i = 0; i < n; ++i) out[i] = 0.0;
    return;
  }
  for (std::size_t i = 0; i < n; ++i) {
    const double w = omega[i];
    const double nw = -w;
    double re = coeffs[ncoeffs - 1];
    double im = 0.0;
    for (std::size_t k = ncoeffs - 1; k-- > 0;) {
      // (re + j im) * (j w) + c
      const double new_re = im * nw + coeffs[k];
      const double new_im = re * w + 0.0;
      re = new_re;
      im = new_im;
    }
    out[i] = {re, im};
  }
}

void cmul_scalar(const cdouble* a, const cdouble* b, cdouble* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    const double ar = a[i].real(), ai = a[i].imag();
    const double br = b[i].real(), bi = b[i].imag();
    out[i] = {ar * br - ai * bi, ai * br + ar * bi};
  }
}

void cdiv_scalar(const cdouble* a, const cdouble* b, cdouble* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    const double ar = a[i].real(), ai = a[i].imag();
    const double br = b[i].real(), bi = b[i].imag();
    const double d = br * br + bi * bi;
    out[i] = {(ar * br + ai * bi) / d, (ai * br - ar * bi) / d};
  }
}

void axpy_scalar(double w, const cdouble* x, cdouble* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i)
    y[i] = {y[i].real() + w * x[i].real(), y[i].imag() + w * x[i].imag()};
}

constexpr FrKernels kScalar{Isa::scalar, polyval_jw_scalar, cmul_scalar, cdiv_scalar,
                            axpy_scalar};

}  // namespace

const FrKernels& scalar_kernels() { return kScalar; }

}  // namespace dyneq::simd
