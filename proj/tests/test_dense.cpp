#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "test_support.hpp"
#include "vbs/dense.hpp"

using namespace vbs;

TEST_CASE("cholesky solve and inverse against the Gauss-Jordan oracle") {
    SplitMix64 rng(21u);
    for (int d : {1, 2, 3, 5, 8, 13, 20}) {
        const Mat a = testsup::random_spd(rng, d);
        const Vec b = testsup::random_vec(rng, d);
        Cholesky chol(a);

        const Vec x = chol.solve(b);
        const Vec x_oracle = testsup::gauss_jordan_solve(a, b);
        CHECK(max_abs_diff(x, x_oracle) < 1e-8);

        const Mat inv = chol.inverse();
        const Mat inv_oracle = testsup::gauss_jordan_inverse(a);
        CHECK(max_abs_diff(inv, inv_oracle) < 1e-8);

        CHECK(chol.log_det() == doctest::Approx(testsup::gj_log_det(a)).epsilon(1e-10));

        // multiply-back: A * A^{-1} = I
        for (int i = 0; i < d; ++i) {
            Vec col(static_cast<std::size_t>(d));
            for (int k = 0; k < d; ++k) col[static_cast<std::size_t>(k)] = inv(k, i);
            const Vec acol = matvec(a, col);
            for (int k = 0; k < d; ++k) {
                CHECK(std::abs(acol[static_cast<std::size_t>(k)] - (k == i ? 1.0 : 0.0)) < 1e-8);
            }
        }
    }
}

TEST_CASE("cholesky rejects indefinite matrices") {
    Mat a(2, 2);
    a(0, 0) = 1.0;
    a(1, 1) = -1.0;
    CHECK_THROWS_AS((void)Cholesky(a), std::runtime_error);

    // jitter rescues a borderline-singular diagonal
    Mat b(2, 2);
    b(0, 0) = 1.0;
    b(1, 1) = 0.0;
    CHECK_THROWS_AS((void)Cholesky(b), std::runtime_error);
    CHECK_NOTHROW((void)Cholesky(b, 1e-8));
}

TEST_CASE("quad_form matches explicit sums") {
    SplitMix64 rng(22u);
    const int d = 6;
    const Mat a = testsup::random_spd(rng, d);
    const Vec x = testsup::random_vec(rng, d);
    double expect = 0.0;
    for (int i = 0; i < d; ++i) {
        for (int j = 0; j < d; ++j) {
            expect += x[static_cast<std::size_t>(i)] * a(i, j) * x[static_cast<std::size_t>(j)];
        }
    }
    CHECK(quad_form(a, x) == doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("symmetrize averages off-diagonal pairs") {
    Mat a(2, 2);
    a(0, 1) = 1.0;
    a(1, 0) = 3.0;
    symmetrize(a);
    CHECK(a(0, 1) == 2.0);
    CHECK(a(1, 0) == 2.0);
}

TEST_CASE("default jitter follows the trace rule") {
    Mat a(4, 4);
    for (int i = 0; i < 4; ++i) a(i, i) = 2.0;
    CHECK(default_jitter(a) == doctest::Approx(1e-10 * 2.0));
}

TEST_CASE("shape errors are rejected") {
    Mat a(2, 3);
    Vec v{1.0, 2.0};
    CHECK_THROWS_AS(matvec(a, v), std::invalid_argument);
    CHECK_THROWS_AS(quad_form(a, v), std::invalid_argument);
    Vec w{1.0};
    CHECK_THROWS_AS(dot(v, w), std::invalid_argument);
}
