#pragma once

#include <complex>
#include <cstddef>
#include <string_view>

// Inner loops of frequency-response work: polynomial evaluation on the
// imaginary axis and pointwise complex arithmetic over a frequency grid.
//
// Every kernel has a scalar reference and, where the target supports it, an
// AVX2 variant. The vector variants perform the same IEEE operations in the
// same order as the scalar reference (no FMA contraction), so results are
// bit-identical up to the sign of zero.

namespace dyneq::simd {

using cdouble = std::complex<double>;

enum class Isa { scalar, avx2 };

std::string_view to_string(Isa isa);

struct FrKernels {
  Isa isa;

  // out[i] = sum_k coeffs[k] * (j*omega[i])^k, coeffs in ascending powers.
  void (*polyval_jw)(const double* coeffs, std::size_t ncoeffs, const double* omega,
                     cdouble* out, std::size_t n);
  // out[i] = a[i] * b[i]
  void (*cmul)(const cdouble* a, const cdouble* b, cdouble* out, std::size_t n);
  // out[i] = a[i] / b[i], computed as a*conj(b)/|b|^2.
  void (*cdiv)(const cdouble* a, const cdouble* b, cdouble* out, std::size_t n);
  // y[i] += w * x[i]
  void (*axpy)(double w, const cdouble* x, cdouble* y, std::size_t n);
};

const FrKernels& scalar_kernels();

// AVX2 table, or nullptr when the build has no AVX2 variant or the running
// CPU lacks AVX2.
const FrKernels* avx2_kernels();

// Best table for the running CPU. Set DYNEQ_FORCE_SCALAR=1 in the
// environment to pin the scalar reference.
const FrKernels& active_kernels();

}  // namespace dyneq::simd
