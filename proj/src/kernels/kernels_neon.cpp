// AArch64 only; NEON is mandatory there so no runtime check is needed.

#include <arm_neon.h>

#include "risloc/kernels.hpp"

namespace risloc::kernels {

namespace {

// One float64x2_t holds a single complex value [re, im].

inline float64x2_t load1(const cdouble* p) { return vld1q_f64(reinterpret_cast<const double*>(p)); }

struct Accumulated {
  double rr, ii, ri, ir;
};

Accumulated accumulate(const cdouble* a, const cdouble* b, std::size_t n) {
  float64x2_t s0 = vdupq_n_f64(0.0), s1 = vdupq_n_f64(0.0);
  float64x2_t c0 = vdupq_n_f64(0.0), c1 = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const float64x2_t a0 = load1(a + i), a1 = load1(a + i + 1);
    const float64x2_t b0 = load1(b + i), b1 = load1(b + i + 1);
    s0 = vfmaq_f64(s0, a0, b0);
    s1 = vfmaq_f64(s1, a1, b1);
    c0 = vfmaq_f64(c0, a0, vextq_f64(b0, b0, 1));
    c1 = vfmaq_f64(c1, a1, vextq_f64(b1, b1, 1));
  }
  const float64x2_t s = vaddq_f64(s0, s1);
  const float64x2_t c = vaddq_f64(c0, c1);
  Accumulated acc{vgetq_lane_f64(s, 0), vgetq_lane_f64(s, 1), vgetq_lane_f64(c, 0), vgetq_lane_f64(c, 1)};
  for (; i < n; ++i) {
    acc.rr += a[i].real() * b[i].real();
    acc.ii += a[i].imag() * b[i].imag();
    acc.ri += a[i].real() * b[i].imag();
    acc.ir += a[i].imag() * b[i].real();
  }
  return acc;
}

cdouble dot_neon(const cdouble* a, const cdouble* b, std::size_t n) {
  const Accumulated acc = accumulate(a, b, n);
  return {acc.rr - acc.ii, acc.ri + acc.ir};
}

cdouble dotc_neon(const cdouble* a, const cdouble* b, std::size_t n) {
  const Accumulated acc = accumulate(a, b, n);
  return {acc.rr + acc.ii, acc.ri - acc.ir};
}

void axpy_neon(cdouble alpha, const cdouble* x, cdouble* y, std::size_t n) {
  const float64x2_t ar = vdupq_n_f64(alpha.real());
  const float64x2_t ai = {-alpha.imag(), alpha.imag()};
  auto* yd = reinterpret_cast<double*>(y);
  for (std::size_t i = 0; i < n; ++i) {
    const float64x2_t xv = load1(x + i);
    float64x2_t yv = vld1q_f64(yd + 2 * i);
    yv = vfmaq_f64(yv, xv, ar);
    yv = vfmaq_f64(yv, vextq_f64(xv, xv, 1), ai);
    vst1q_f64(yd + 2 * i, yv);
  }
}

void hadamard_neon(const cdouble* a, const cdouble* b, cdouble* out, std::size_t n) {
  auto* od = reinterpret_cast<double*>(out);
  for (std::size_t i = 0; i < n; ++i) {
    const float64x2_t av = load1(a + i);
    const float64x2_t b_re = vdupq_n_f64(b[i].real());
    const float64x2_t b_im = {-b[i].imag(), b[i].imag()};
    float64x2_t o = vmulq_f64(av, b_re);
    o = vfmaq_f64(o, vextq_f64(av, av, 1), b_im);
    vst1q_f64(od + 2 * i, o);
  }
}

}  // namespace

const KernelSet& neon_kernel_set() {
  static const KernelSet set{"neon", dot_neon, dotc_neon, axpy_neon, hadamard_neon};
  return set;
}

}  // namespace risloc::kernels
