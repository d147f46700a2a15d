#include "vbs/dense.hpp"

#include <cmath>
#include <stdexcept>

namespace vbs {

double dot(const Vec& x, const Vec& y) {
    if (x.size() != y.size()) throw std::invalid_argument("dot: size mismatch");
    return kernels::dot(x.data(), y.data(), x.size());
}

void axpy(double a, const Vec& x, Vec& y) {
    if (x.size() != y.size()) throw std::invalid_argument("axpy: size mismatch");
    kernels::axpy(a, x.data(), y.data(), x.size());
}

Vec matvec(const Mat& a, const Vec& x) {
    if (static_cast<std::size_t>(a.cols()) != x.size()) {
        throw std::invalid_argument("matvec: shape mismatch");
    }
    Vec out(static_cast<std::size_t>(a.rows()));
    kernels::matvec(a.data(), x.data(), out.data(), a.rows(), a.cols());
    return out;
}

void add_rank1(Mat& a, const Vec& x, const Vec& y, double alpha) {
    if (static_cast<std::size_t>(a.rows()) != x.size() ||
        static_cast<std::size_t>(a.cols()) != y.size()) {
        throw std::invalid_argument("add_rank1: shape mismatch");
    }
    kernels::rank1_update(a.data(), x.data(), y.data(), alpha, a.rows(), a.cols());
}

double quad_form(const Mat& a, const Vec& x) {
    if (a.rows() != a.cols()) throw std::invalid_argument("quad_form: matrix not square");
    Vec ax = matvec(a, x);
    return kernels::dot(x.data(), ax.data(), x.size());
}

double norm2(const Vec& x) { return std::sqrt(kernels::dot(x.data(), x.data(), x.size())); }

double max_abs(const Mat& a) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a.data()[i]));
    return m;
}

double max_abs_diff(const Mat& a, const Mat& b) {
    if (!a.same_shape(b)) throw std::invalid_argument("max_abs_diff: shape mismatch");
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a.data()[i] - b.data()[i]));
    return m;
}

double max_abs_diff(const Vec& a, const Vec& b) {
    if (a.size() != b.size()) throw std::invalid_argument("max_abs_diff: size mismatch");
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

void symmetrize(Mat& a) {
    if (a.rows() != a.cols()) throw std::invalid_argument("symmetrize: matrix not square");
    for (int i = 0; i < a.rows(); ++i) {
        for (int j = i + 1; j < a.cols(); ++j) {
            const double v = 0.5 * (a(i, j) + a(j, i));
            a(i, j) = v;
            a(j, i) = v;
        }
    }
}

bool all_finite(const Mat& a) {
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (!std::isfinite(a.data()[i])) return false;
    }
    return true;
}

bool all_finite(const Vec& a) {
    for (double v : a) {
        if (!std::isfinite(v)) return false;
    }
    return true;
}

double default_jitter(const Mat& a) {
    if (a.rows() == 0) return 0.0;
    double tr = 0.0;
    for (int i = 0; i < a.rows(); ++i) tr += a(i, i);
    return 1e-10 * tr / a.rows();
}

Cholesky::Cholesky(const Mat& a, double jitter) {
    if (a.rows() != a.cols()) throw std::invalid_argument("cholesky: matrix not square");
    const int n = a.rows();
    l_ = Mat(n, n);
    for (int i = 0; i < n; ++i) {
        const double* li = l_.row(i);
        for (int j = 0; j <= i; ++j) {
            double s = a(i, j) - kernels::dot(li, l_.row(j), static_cast<std::size_t>(j));
            if (i == j) {
                s += jitter;
                if (!(s > 0.0) || !std::isfinite(s)) {
                    throw std::runtime_error("cholesky: matrix not positive definite");
                }
                l_(i, i) = std::sqrt(s);
            } else {
                l_(i, j) = s / l_(j, j);
            }
        }
    }
}

Vec Cholesky::solve(const Vec& b) const {
    const int n = l_.rows();
    if (b.size() != static_cast<std::size_t>(n)) throw std::invalid_argument("cholesky solve: size mismatch");
    Vec y(b);
    for (int i = 0; i < n; ++i) {
        y[i] = (y[i] - kernels::dot(l_.row(i), y.data(), static_cast<std::size_t>(i))) / l_(i, i);
    }
    for (int i = n - 1; i >= 0; --i) {
        double s = y[i];
        for (int k = i + 1; k < n; ++k) s -= l_(k, i) * y[k];
        y[i] = s / l_(i, i);
    }
    return y;
}

Mat Cholesky::inverse() const {
    const int n = l_.rows();
    Mat inv(n, n);
    Vec e(static_cast<std::size_t>(n), 0.0);
    for (int j = 0; j < n; ++j) {
        e[j] = 1.0;
        Vec col = solve(e);
        e[j] = 0.0;
        for (int i = 0; i < n; ++i) inv(i, j) = col[i];
    }
    symmetrize(inv);
    return inv;
}

double Cholesky::log_det() const {
    double s = 0.0;
    for (int i = 0; i < l_.rows(); ++i) s += std::log(l_(i, i));
    return 2.0 * s;
}

}  // namespace vbs
