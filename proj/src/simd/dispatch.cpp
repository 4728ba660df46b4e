#include <atomic>
#include <cstdlib>
#include <stdexcept>
#include <string>

#include "gated_spectra/simd/kernels.hpp"

namespace gspec::simd {
namespace {

bool cpu_has_avx2() {
#if defined(GATED_SPECTRA_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

const KernelTable& table_for(Backend b) {
#if defined(GATED_SPECTRA_HAVE_AVX2)
  if (b == Backend::Avx2) return avx2_kernels();
#endif
  (void)b;
  return scalar_kernels();
}

Backend initial_backend() {
  if (const char* env = std::getenv("GATED_SPECTRA_SIMD")) {
    const std::string v(env);
    if (v == "scalar") return Backend::Scalar;
    if (v == "avx2" && cpu_has_avx2()) return Backend::Avx2;
  }
  return cpu_has_avx2() ? Backend::Avx2 : Backend::Scalar;
}

std::atomic<const KernelTable*>& active_table() {
  static std::atomic<const KernelTable*> table{&table_for(initial_backend())};
  return table;
}

}  // namespace

const KernelTable& kernels() { return *active_table().load(std::memory_order_relaxed); }

bool backend_available(Backend b) { return b == Backend::Scalar || cpu_has_avx2(); }

void set_backend(Backend b) {
  if (!backend_available(b))
    throw std::invalid_argument("SIMD backend " + std::string(backend_name(b)) +
                                " is not available on this CPU/build");
  active_table().store(&table_for(b), std::memory_order_relaxed);
}

Backend active_backend() { return kernels().backend; }

std::string_view backend_name(Backend b) {
  switch (b) {
    case Backend::Scalar: return "scalar";
    case Backend::Avx2: return "avx2";
  }
  return "unknown";
}

}  // namespace gspec::simd
