#pragma once
// Inner-loop arithmetic kernels shared by every dense routine in the library.
//
// Each kernel has a portable scalar reference implementation and, on x86-64,
// an AVX2/FMA variant. The variant is chosen once at startup from CPUID and
// can be overridden with GATED_SPECTRA_SIMD=scalar|avx2 or set_backend().
// Variants agree to rounding; they are not bitwise identical because the
// vector versions reassociate the reductions.

#include <array>
#include <cstddef>
#include <string_view>

namespace gspec::simd {

enum class Backend { Scalar, Avx2 };

struct KernelTable {
  Backend backend;
  /// sum_i a[i] * b[i]
  double (*dot)(const double* a, const double* b, std::size_t n);
  /// {a.a, b.b, a.b} in a single pass; the Jacobi SVD inner loop.
  std::array<double, 3> (*dot3)(const double* a, const double* b, std::size_t n);
  /// y += alpha * x
  void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
  /// (a, b) <- (c*a - s*b, s*a + c*b)
  void (*rotate)(double* a, double* b, std::size_t n, double c, double s);
  /// x <- alpha * x
  void (*scale)(double alpha, double* x, std::size_t n);
  /// C(m x n) = A(m x k) * B(k x n), all row-major and densely packed.
  void (*gemm)(const double* a, const double* b, double* c, std::size_t m, std::size_t k,
               std::size_t n);
};

const KernelTable& scalar_kernels();
#if defined(GATED_SPECTRA_HAVE_AVX2)
const KernelTable& avx2_kernels();
#endif

/// The table used by the library right now.
const KernelTable& kernels();

bool backend_available(Backend b);
/// Throws std::invalid_argument when the CPU or the build lacks the backend.
void set_backend(Backend b);
Backend active_backend();
std::string_view backend_name(Backend b);

/// RAII override, used by the equivalence tests.
class ScopedBackend {
 public:
  explicit ScopedBackend(Backend b) : previous_(active_backend()) { set_backend(b); }
  ~ScopedBackend() { set_backend(previous_); }
  ScopedBackend(const ScopedBackend&) = delete;
  ScopedBackend& operator=(const ScopedBackend&) = delete;

 private:
  Backend previous_;
};

}  // namespace gspec::simd
