// Compiled with -mavx2 -mfma; only reached after a runtime feature check.

#include <immintrin.h>

#include "risloc/kernels.hpp"

namespace risloc::kernels {

namespace {

// One __m256d holds two interleaved complex values: [re0, im0, re1, im1].

inline __m256d load2(const cdouble* p) { return _mm256_loadu_pd(reinterpret_cast<const double*>(p)); }

inline double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d s = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

// Accumulates straight = [ar*br, ai*bi, ...] and crossed = [ar*bi, ai*br, ...].
struct Accumulated {
  double rr, ii, ri, ir;
};

Accumulated accumulate(const cdouble* a, const cdouble* b, std::size_t n) {
  __m256d s0 = _mm256_setzero_pd(), s1 = _mm256_setzero_pd();
  __m256d c0 = _mm256_setzero_pd(), c1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d a0 = load2(a + i), a1 = load2(a + i + 2);
    const __m256d b0 = load2(b + i), b1 = load2(b + i + 2);
    s0 = _mm256_fmadd_pd(a0, b0, s0);
    s1 = _mm256_fmadd_pd(a1, b1, s1);
    c0 = _mm256_fmadd_pd(a0, _mm256_permute_pd(b0, 0x5), c0);
    c1 = _mm256_fmadd_pd(a1, _mm256_permute_pd(b1, 0x5), c1);
  }
  for (; i + 2 <= n; i += 2) {
    const __m256d a0 = load2(a + i), b0 = load2(b + i);
    s0 = _mm256_fmadd_pd(a0, b0, s0);
    c0 = _mm256_fmadd_pd(a0, _mm256_permute_pd(b0, 0x5), c0);
  }
  alignas(32) double s[4], c[4];
  _mm256_store_pd(s, _mm256_add_pd(s0, s1));
  _mm256_store_pd(c, _mm256_add_pd(c0, c1));
  Accumulated acc{s[0] + s[2], s[1] + s[3], c[0] + c[2], c[1] + c[3]};
  for (; i < n; ++i) {
    acc.rr += a[i].real() * b[i].real();
    acc.ii += a[i].imag() * b[i].imag();
    acc.ri += a[i].real() * b[i].imag();
    acc.ir += a[i].imag() * b[i].real();
  }
  return acc;
}

cdouble dot_avx2(const cdouble* a, const cdouble* b, std::size_t n) {
  const Accumulated acc = accumulate(a, b, n);
  return {acc.rr - acc.ii, acc.ri + acc.ir};
}

cdouble dotc_avx2(const cdouble* a, const cdouble* b, std::size_t n) {
  const Accumulated acc = accumulate(a, b, n);
  return {acc.rr + acc.ii, acc.ri - acc.ir};
}

void axpy_avx2(cdouble alpha, const cdouble* x, cdouble* y, std::size_t n) {
  const __m256d ar = _mm256_set1_pd(alpha.real());
  const __m256d ai = _mm256_set1_pd(alpha.imag());
  auto* yd = reinterpret_cast<double*>(y);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const __m256d xv = load2(x + i);
    const __m256d swapped = _mm256_mul_pd(ai, _mm256_permute_pd(xv, 0x5));
    // even lanes: ar*xr - ai*xi, odd lanes: ar*xi + ai*xr
    const __m256d prod = _mm256_fmaddsub_pd(xv, ar, swapped);
    _mm256_storeu_pd(yd + 2 * i, _mm256_add_pd(_mm256_loadu_pd(yd + 2 * i), prod));
  }
  for (; i < n; ++i) {
    const double xr = x[i].real(), xi = x[i].imag();
    y[i] = {y[i].real() + (alpha.real() * xr - alpha.imag() * xi),
            y[i].imag() + (alpha.real() * xi + alpha.imag() * xr)};
  }
}

void hadamard_avx2(const cdouble* a, const cdouble* b, cdouble* out, std::size_t n) {
  auto* od = reinterpret_cast<double*>(out);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const __m256d av = load2(a + i), bv = load2(b + i);
    const __m256d b_re = _mm256_movedup_pd(bv);
    const __m256d b_im = _mm256_permute_pd(bv, 0xF);
    const __m256d cross = _mm256_mul_pd(_mm256_permute_pd(av, 0x5), b_im);
    _mm256_storeu_pd(od + 2 * i, _mm256_fmaddsub_pd(av, b_re, cross));
  }
  for (; i < n; ++i) {
    const double ar = a[i].real(), ai = a[i].imag();
    const double br = b[i].real(), bi = b[i].imag();
    out[i] = {ar * br - ai * bi, ar * bi + ai * br};
  }
}

}  // namespace

const KernelSet& avx2_kernel_set() {
  static const KernelSet set{"avx2", dot_avx2, dotc_avx2, axpy_avx2, hadamard_avx2};
  return set;
}

}  // namespace risloc::kernels
