#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "test_support.hpp"
#include "vbs/kernels.hpp"

using namespace vbs;

namespace {

// Sizes chosen to cover empty, sub-vector-width, exact multiples and tails.
const std::size_t kSizes[] = {0, 1, 2, 3, 4, 5, 7, 8, 15, 16, 17, 63, 64, 65, 128, 1000};

struct BackendFixture {
    std::vector<const kernels::Ops*> simd;

    BackendFixture() {
#if defined(__x86_64__) || defined(_M_X64)
        if (kernels::backend_available(kernels::Backend::Avx2)) simd.push_back(&kernels::avx2_ops());
#endif
#if defined(__aarch64__)
        if (kernels::backend_available(kernels::Backend::Neon)) simd.push_back(&kernels::neon_ops());
#endif
    }
};

}  // namespace

TEST_CASE("simd kernels agree with the scalar reference") {
    BackendFixture fx;
    if (fx.simd.empty()) {
        MESSAGE("no SIMD backend available on this host; scalar-only build");
        return;
    }
    const auto& ref = kernels::scalar_ops();
    SplitMix64 rng(11u);

    for (const auto* ops : fx.simd) {
        for (std::size_t n : kSizes) {
            Vec x = testsup::random_vec(rng, static_cast<int>(n));
            Vec y = testsup::random_vec(rng, static_cast<int>(n));

            // dot: reassociation-tolerant comparison
            const double d_ref = ref.dot(x.data(), y.data(), n);
            const double d_simd = ops->dot(x.data(), y.data(), n);
            CHECK(std::abs(d_ref - d_simd) <= 1e-12 * (1.0 + std::abs(d_ref) + n));

            Vec y1 = y, y2 = y;
            ref.axpy(1.7, x.data(), y1.data(), n);
            ops->axpy(1.7, x.data(), y2.data(), n);
            CHECK(max_abs_diff(y1, y2) <= 1e-13);

            Vec x1 = x, x2 = x;
            ref.scale(-0.3, x1.data(), n);
            ops->scale(-0.3, x2.data(), n);
            CHECK(max_abs_diff(x1, x2) == 0.0);
        }

        // rank1 and matvec on non-square shapes
        for (int rows : {1, 3, 8, 17}) {
            for (int cols : {1, 4, 9, 32}) {
                Mat a1(rows, cols), a2(rows, cols);
                for (std::size_t i = 0; i < a1.size(); ++i) a1.data()[i] = a2.data()[i] = 0.1 * (double)i;
                Vec u = testsup::random_vec(rng, rows);
                Vec v = testsup::random_vec(rng, cols);
                ref.rank1_update(a1.data(), u.data(), v.data(), 0.9, rows, cols);
                ops->rank1_update(a2.data(), u.data(), v.data(), 0.9, rows, cols);
                CHECK(max_abs_diff(a1, a2) <= 1e-13);

                Vec o1(static_cast<std::size_t>(rows)), o2(static_cast<std::size_t>(rows));
                ref.matvec(a1.data(), v.data(), o1.data(), rows, cols);
                ops->matvec(a1.data(), v.data(), o2.data(), rows, cols);
                for (std::size_t i = 0; i < o1.size(); ++i) {
                    CHECK(std::abs(o1[i] - o2[i]) <= 1e-12 * (1.0 + std::abs(o1[i])));
                }
            }
        }
    }
}

TEST_CASE("unaligned views behave like aligned ones") {
    BackendFixture fx;
    if (fx.simd.empty()) return;
    SplitMix64 rng(12u);
    Vec x = testsup::random_vec(rng, 130);
    Vec y = testsup::random_vec(rng, 130);
    for (const auto* ops : fx.simd) {
        for (std::size_t off : {1u, 2u, 3u}) {
            const std::size_t n = 120;
            const double a = kernels::scalar_ops().dot(x.data() + off, y.data() + off, n);
            const double b = ops->dot(x.data() + off, y.data() + off, n);
            CHECK(std::abs(a - b) <= 1e-12 * (1.0 + std::abs(a)));
        }
    }
}

TEST_CASE("backend forcing switches the dispatch table") {
    const kernels::Backend original = kernels::active_backend();

    kernels::force_backend(kernels::Backend::Scalar);
    CHECK(kernels::active_backend() == kernels::Backend::Scalar);
    Vec x{1.0, 2.0, 3.0};
    CHECK(kernels::dot(x.data(), x.data(), 3) == doctest::Approx(14.0));

    CHECK_THROWS_AS(
        kernels::force_backend(kernels::backend_available(kernels::Backend::Avx2)
                                   ? kernels::Backend::Neon
                                   : kernels::Backend::Avx2),
        std::invalid_argument);

    kernels::force_backend(original);
    CHECK(kernels::active_backend() == original);
}
