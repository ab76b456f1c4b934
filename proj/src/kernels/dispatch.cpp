#include <cstdlib>
#include <string_view>

#include "risloc/kernels.hpp"

namespace risloc::kernels {

#if defined(RISLOC_HAVE_AVX2)
const KernelSet& avx2_kernel_set();
#endif
#if defined(RISLOC_HAVE_NEON)
const KernelSet& neon_kernel_set();
#endif

const KernelSet* avx2() {
#if defined(RISLOC_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
  static const bool supported = __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
  return supported ? &avx2_kernel_set() : nullptr;
#else
  return nullptr;
#endif
}

const KernelSet* neon() {
#if defined(RISLOC_HAVE_NEON)
  return &neon_kernel_set();
#else
  return nullptr;
#endif
}

std::vector<const KernelSet*> available() {
  std::vector<const KernelSet*> out{&scalar()};
  if (const KernelSet* k = avx2()) out.push_back(k);
  if (const KernelSet* k = neon()) out.push_back(k);
  return out;
}

namespace {

const KernelSet& select() {
  const std::vector<const KernelSet*> sets = available();
  if (const char* forced = std::getenv("RISLOC_KERNELS")) {
    for (const KernelSet* k : sets) {
      if (k->name == std::string_view(forced)) return *k;
    }
  }
  return *sets.back();
}

}  // namespace

const KernelSet& active() {
  static const KernelSet& chosen = select();
  return chosen;
}

}  // namespace risloc::kernels
