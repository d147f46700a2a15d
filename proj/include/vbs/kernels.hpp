#pragma once

// Dense double-precision kernels used by every inner loop in the library.
// Each kernel has a scalar reference implementation and, where the build
// target supports it, an AVX2+FMA or NEON variant selected at runtime.
// The scalar versions are the semantic reference; SIMD variants must agree
// with them up to floating-point reassociation (see tests/test_kernels.cpp).

#include <cstddef>

namespace vbs::kernels {

enum class Backend { Scalar, Avx2, Neon };

struct Ops {
    // sum_i x[i]*y[i]
    double (*dot)(const double* x, const double* y, std::size_t n);
    // y += a*x
    void (*axpy)(double a, const double* x, double* y, std::size_t n);
    // x *= a
    void (*scale)(double a, double* x, std::size_t n);
    // A += a * x * y^T, A row-major (rows x cols), x len rows, y len cols
    void (*rank1_update)(double* a, const double* x, const double* y, double alpha,
                         std::size_t rows, std::size_t cols);
    // out = A * x, A row-major (rows x cols)
    void (*matvec)(const double* a, const double* x, double* out,
                   std::size_t rows, std::size_t cols);
};

const Ops& scalar_ops();
#if defined(__x86_64__) || defined(_M_X64)
const Ops& avx2_ops();
#endif
#if defined(__aarch64__)
const Ops& neon_ops();
#endif

bool backend_available(Backend b);

// Active table. Chosen once: VBS_KERNEL_BACKEND=scalar|avx2|neon|auto if set,
// otherwise the widest backend the CPU supports.
const Ops& ops();
Backend active_backend();
const char* backend_name(Backend b);

// Override the active backend (tests, --kernel-backend flag). Throws
// std::invalid_argument if the requested backend is not available here.
void force_backend(Backend b);

inline double dot(const double* x, const double* y, std::size_t n) { return ops().dot(x, y, n); }
inline void axpy(double a, const double* x, double* y, std::size_t n) { ops().axpy(a, x, y, n); }
inline void scale(double a, double* x, std::size_t n) { ops().scale(a, x, n); }
inline void rank1_update(double* a, const double* x, const double* y, double alpha,
                         std::size_t rows, std::size_t cols) {
    ops().rank1_update(a, x, y, alpha, rows, cols);
}
inline void matvec(const double* a, const double* x, double* out,
                   std::size_t rows, std::size_t cols) {
    ops().matvec(a, x, out, rows, cols);
}

}  // namespace vbs::kernels
