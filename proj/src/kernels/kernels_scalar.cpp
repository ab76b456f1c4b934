#include "risloc/kernels.hpp"

namespace risloc::kernels {

namespace {

// Four real accumulators, combined the same way as the SIMD variants.
cdouble dot_scalar(const cdouble* a, const cdouble* b, std::size_t n) {
  double rr = 0.0, ii = 0.0, ri = 0.0, ir = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    rr += a[i].real() * b[i].real();
    ii += a[i].imag() * b[i].imag();
    ri += a[i].real() * b[i].imag();
    ir += a[i].imag() * b[i].real();
  }
  return {rr - ii, ri + ir};
}

cdouble dotc_scalar(const cdouble* a, const cdouble* b, std::size_t n) {
  double rr = 0.0, ii = 0.0, ri = 0.0, ir = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    rr += a[i].real() * b[i].real();
    ii += a[i].imag() * b[i].imag();
    ri += a[i].real() * b[i].imag();
    ir += a[i].imag() * b[i].real();
  }
  return {rr + ii, ri - ir};
}

void axpy_scalar(cdouble alpha, const cdouble* x, cdouble* y, std::size_t n) {
  const double ar = alpha.real(), ai = alpha.imag();
  for (std::size_t i = 0; i < n; ++i) {
    const double xr = x[i].real(), xi = x[i].imag();
    y[i] = {y[i].real() + (ar * xr - ai * xi), y[i].imag() + (ar * xi + ai * xr)};
  }
}

void hadamard_scalar(const cdouble* a, const cdouble* b, cdouble* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    const double ar = a[i].real(), ai = a[i].imag();
    const double br = b[i].real(), bi = b[i].imag();
    out[i] = {ar * br - ai * bi, ar * bi + ai * br};
  }
}

}  // namespace

const KernelSet& scalar() {
  static const KernelSet set{"scalar", dot_scalar, dotc_scalar, axpy_scalar, hadamard_scalar};
  return set;
}

}  // namespace risloc::kernels
