#include "dyneq/simd/fr_kernels.hpp"

#if defined(__x86_64__) || defined(_M_X64)
#define DYNEQ_HAVE_AVX2_VARIANT 1
#include <immintrin.h>
#else
#define DYNEQ_HAVE_AVX2_VARIANT 0
#endif

namespace dyneq::simd {

// Built without -mavx2; the target attribute confines AVX2 code generation to
// these functions so nothing leaks into inline functions shared with the
// scalar translation units.

#if DYNEQ_HAVE_AVX2_VARIANT

namespace {

#define DYNEQ_AVX2 __attribute__((target("avx2")))

// Complex arrays are interleaved (re, im); one __m256d holds two samples.

DYNEQ_AVX2 void polyval_jw_avx2(const double* coeffs, std::size_t ncoeffs, const double* omega,
                                cdouble* out, std::size_t n) {
  double* o = reinterpret_cast<double*>(out);
  if (ncoeffs == 0) {
    for (std::size_t i = 0; i < 2 * n; ++i) o[i] = 0.0;
    return;
  }
  const double lead = coeffs[ncoeffs - 1];
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const __m256d w = _mm256_set_pd(omega[i + 1], -omega[i + 1], omega[i], -omega[i]);
    __m256d p = _mm256_set_pd(0.0, lead, 0.0, lead);
    for (std::size_t k = ncoeffs - 1; k-- > 0;) {
      const __m256d c = _mm256_set_pd(0.0, coeffs[k], 0.0, coeffs[k]);
      const __m256d swapped = _mm256_permute_pd(p, 0b0101);
      p = _mm256_add_pd(_mm256_mul_pd(swapped, w), c);
    }
    _mm256_storeu_pd(o + 2 * i, p);
  }
  if (i < n) scalar_kernels().polyval_jw(coeffs, ncoeffs, omega + i, out + i, n - i);
}

DYNEQ_AVX2 void cmul_avx2(const cdouble* a, const cdouble* b, cdouble* out, std::size_t n) {
  const double* pa = reinterpret_cast<const double*>(a);
  const double* pb = reinterpret_cast<const double*>(b);
  double* po = reinterpret_cast<double*>(out);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const __m256d va = _mm256_loadu_pd(pa + 2 * i);
    const __m256d vb = _mm256_loadu_pd(pb + 2 * i);
    const __m256d t1 = _mm256_mul_pd(va, vb);                             // ar*br, ai*bi
    const __m256d t2 = _mm256_mul_pd(_mm256_permute_pd(va, 0b0101), vb);  // ai*br, ar*bi
    const __m256d re = _mm256_hsub_pd(t1, t1);
    const __m256d im = _mm256_hadd_pd(t2, t2);
    _mm256_storeu_pd(po + 2 * i, _mm256_blend_pd(re, im, 0b1010));
  }
  if (i < n) scalar_kernels().cmul(a + i, b + i, out + i, n - i);
}

DYNEQ_AVX2 void cdiv_avx2(const cdouble* a, const cdouble* b, cdouble* out, std::size_t n) {
  const double* pa = reinterpret_cast<const double*>(a);
  const double* pb = reinterpret_cast<const double*>(b);
  double* po = reinterpret_cast<double*>(out);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const __m256d va = _mm256_loadu_pd(pa + 2 * i);
    const __m256d vb = _mm256_loadu_pd(pb + 2 * i);
    const __m256d bb = _mm256_mul_pd(vb, vb);
    const __m256d d = _mm256_hadd_pd(bb, bb);
    const __m256d t1 = _mm256_mul_pd(va, vb);
    const __m256d t2 = _mm256_mul_pd(_mm256_permute_pd(va, 0b0101), vb);
    const __m256d num = _mm256_blend_pd(_mm256_hadd_pd(t1, t1), _mm256_hsub_pd(t2, t2), 0b1010);
    _mm256_storeu_pd(po + 2 * i, _mm256_div_pd(num, d));
  }
  if (i < n) scalar_kernels().cdiv(a + i, b + i, out + i, n - i);
}

DYNEQ_AVX2 void axpy_avx2(double w, const cdouble* x, cdouble* y, std::size_t n) {
  const double* px = reinterpret_cast<const double*>(x);
  double* py = reinterpret_cast<double*>(y);
  const __m256d vw = _mm256_set1_pd(w);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const __m256d vx = _mm256_loadu_pd(px + 2 * i);
    const __m256d vy = _mm256_loadu_pd(py + 2 * i);
    _mm256_storeu_pd(py + 2 * i, _mm256_add_pd(vy, _mm256_mul_pd(vw, vx)));
  }
  if (i < n) scalar_kernels().axpy(w, x + i, y + i, n - i);
}

constexpr FrKernels kAvx2{Isa::avx2, polyval_jw_avx2, cmul_avx2, cdiv_avx2, axpy_avx2};

}  // namespace

const FrKernels* avx2_table_if_compiled() { return &kAvx2; }

#else

const FrKernels* avx2_table_if_compiled() { return nullptr; }

#endif

}  // namespace dyneq::simd
