// NEON kernel variants for aarch64. float64x2 throughout; tails scalar.

#if defined(__aarch64__)

#include "vbs/kernels.hpp"

#include <arm_neon.h>

namespace vbs::kernels {

namespace {

double dot_neon(const double* x, const double* y, std::size_t n) {
    float64x2_t acc0 = vdupq_n_f64(0.0);
    float64x2_t acc1 = vdupq_n_f64(0.0);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        acc0 = vfmaq_f64(acc0, vld1q_f64(x + i), vld1q_f64(y + i));
        acc1 = vfmaq_f64(acc1, vld1q_f64(x + i + 2), vld1q_f64(y + i + 2));
    }
    for (; i + 2 <= n; i += 2) {
        acc0 = vfmaq_f64(acc0, vld1q_f64(x + i), vld1q_f64(y + i));
    }
    double acc = vaddvq_f64(vaddq_f64(acc0, acc1));
    for (; i < n; ++i) acc += x[i] * y[i];
    return acc;
}

void axpy_neon(double a, const double* x, double* y, std::size_t n) {
    const float64x2_t va = vdupq_n_f64(a);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        float64x2_t vy = vld1q_f64(y + i);
        vy = vfmaq_f64(vy, va, vld1q_f64(x + i));
        vst1q_f64(y + i, vy);
    }
    for (; i < n; ++i) y[i] += a * x[i];
}

void scale_neon(double a, double* x, std::size_t n) {
    const float64x2_t va = vdupq_n_f64(a);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        vst1q_f64(x + i, vmulq_f64(va, vld1q_f64(x + i)));
    }
    for (; i < n; ++i) x[i] *= a;
}

void rank1_neon(double* a, const double* x, const double* y, double alpha,
                std::size_t rows, std::size_t cols) {
    for (std::size_t i = 0; i < rows; ++i) {
        axpy_neon(alpha * x[i], y, a + i * cols, cols);
    }
}

void matvec_neon(const double* a, const double* x, double* out,
                 std::size_t rows, std::size_t cols) {
    for (std::size_t i = 0; i < rows; ++i) out[i] = dot_neon(a + i * cols, x, cols);
}

const Ops kNeon{dot_neon, axpy_neon, scale_neon, rank1_neon, matvec_neon};

}  // namespace

const Ops& neon_ops() { return kNeon; }

}  // namespace vbs::kernels

#endif  // aarch64
