#pragma once

// Complex double-precision inner loops. Each kernel has a portable scalar
// reference and optional SIMD variants; the variant is picked once at runtime
// from CPU features and can be forced with RISLOC_KERNELS=scalar|avx2|neon.

#include <complex>
#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

namespace risloc::kernels {

using cdouble = std::complex<double>;

struct KernelSet {
  std::string_view name;
  // sum_i a[i] * b[i]
  cdouble (*dot)(const cdouble* a, const cdouble* b, std::size_t n);
  // sum_i conj(a[i]) * b[i]
  cdouble (*dotc)(const cdouble* a, const cdouble* b, std::size_t n);
  // y[i] += alpha * x[i]
  void (*axpy)(cdouble alpha, const cdouble* x, cdouble* y, std::size_t n);
  // out[i] = a[i] * b[i]; out may alias a or b
  void (*hadamard)(const cdouble* a, const cdouble* b, cdouble* out, std::size_t n);
};

const KernelSet& scalar();
// nullptr when the variant is not compiled in or the CPU lacks the features.
const KernelSet* avx2();
const KernelSet* neon();

// Every variant usable on this machine, scalar first.
std::vector<const KernelSet*> available();

// Best available variant, honoring RISLOC_KERNELS.
const KernelSet& active();

inline cdouble dot(std::span<const cdouble> a, std::span<const cdouble> b) {
  return active().dot(a.data(), b.data(), a.size() < b.size() ? a.size() : b.size());
}

inline cdouble dotc(std::span<const cdouble> a, std::span<const cdouble> b) {
  return active().dotc(a.data(), b.data(), a.size() < b.size() ? a.size() : b.size());
}

inline void axpy(cdouble alpha, std::span<const cdouble> x, std::span<cdouble> y) {
  active().axpy(alpha, x.data(), y.data(), x.size() < y.size() ? x.size() : y.size());
}

inline void hadamard(std::span<const cdouble> a, std::span<const cdouble> b, std::span<cdouble> out) {
  std::size_t n = a.size() < b.size() ? a.size() : b.size();
  n = n < out.size() ? n : out.size();
  active().hadamard(a.data(), b.data(), out.data(), n);
}

}  // namespace risloc::kernels
