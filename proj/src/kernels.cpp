#include "vbs/kernels.hpp"

#include <atomic>
#include <cstdlib>
#include <cstring>
#include <string>
#include <stdexcept>

namespace vbs::kernels {

namespace {

double dot_scalar(const double* x, const double* y, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += x[i] * y[i];
    return acc;
}

void axpy_scalar(double a, const double* x, double* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

void scale_scalar(double a, double* x, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) x[i] *= a;
}

void rank1_scalar(double* a, const double* x, const double* y, double alpha,
                  std::size_t rows, std::size_t cols) {
    for (std::size_t i = 0; i < rows; ++i) {
        const double c = alpha * x[i];
        double* row = a + i * cols;
        for (std::size_t j = 0; j < cols; ++j) row[j] += c * y[j];
    }
}

void matvec_scalar(const double* a, const double* x, double* out,
                   std::size_t rows, std::size_t cols) {
    for (std::size_t i = 0; i < rows; ++i) out[i] = dot_scalar(a + i * cols, x, cols);
}

const Ops kScalar{dot_scalar, axpy_scalar, scale_scalar, rank1_scalar, matvec_scalar};

bool cpu_has_avx2() {
#if defined(__x86_64__) || defined(_M_X64)
#if defined(__GNUC__) || defined(__clang__)
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
    return false;
#endif
#else
    return false;
#endif
}

std::atomic<const Ops*> g_ops{nullptr};
std::atomic<Backend> g_backend{Backend::Scalar};

Backend pick_default() {
    const char* env = std::getenv("VBS_KERNEL_BACKEND");
    if (env != nullptr && std::strlen(env) > 0) {
        std::string v(env);
        if (v == "scalar") return Backend::Scalar;
        if (v == "avx2" && backend_available(Backend::Avx2)) return Backend::Avx2;
        if (v == "neon" && backend_available(Backend::Neon)) return Backend::Neon;
        // unknown or unavailable value falls through to auto selection
    }
    if (backend_available(Backend::Avx2)) return Backend::Avx2;
    if (backend_available(Backend::Neon)) return Backend::Neon;
    return Backend::Scalar;
}

const Ops* table_for(Backend b) {
    switch (b) {
        case Backend::Avx2:
#if defined(__x86_64__) || defined(_M_X64)
            return &avx2_ops();
#else
            return nullptr;
#endif
        case Backend::Neon:
#if defined(__aarch64__)
            return &neon_ops();
#else
            return nullptr;
#endif
        case Backend::Scalar:
        default:
            return &kScalar;
    }
}

void ensure_selected() {
    if (g_ops.load(std::memory_order_acquire) == nullptr) {
        Backend b = pick_default();
        g_backend.store(b, std::memory_order_relaxed);
        g_ops.store(table_for(b), std::memory_order_release);
    }
}

}  // namespace

const Ops& scalar_ops() { return kScalar; }

bool backend_available(Backend b) {
    switch (b) {
        case Backend::Scalar: return true;
        case Backend::Avx2:
#if defined(__x86_64__) || defined(_M_X64)
            return cpu_has_avx2();
#else
            return false;
#endif
        case Backend::Neon:
#if defined(__aarch64__)
            return true;
#else
            return false;
#endif
    }
    return false;
}

const Ops& ops() {
    ensure_selected();
    return *g_ops.load(std::memory_order_acquire);
}

Backend active_backend() {
    ensure_selected();
    return g_backend.load(std::memory_order_relaxed);
}

const char* backend_name(Backend b) {
    switch (b) {
        case Backend::Scalar: return "scalar";
        case Backend::Avx2: return "avx2";
        case Backend::Neon: return "neon";
    }
    return "scalar";
}

void force_backend(Backend b) {
    if (!backend_available(b)) {
        throw std::invalid_argument(std::string("kernel backend not available: ") + backend_name(b));
    }
    g_backend.store(b, std::memory_order_relaxed);
    g_ops.store(table_for(b), std::memory_order_release);
}

}  // namespace vbs::kernels
