#pragma once

// Small dense double-precision containers and factorizations built on the
// kernel layer. Row-major storage throughout.

#include <cstddef>
#include <vector>

#include "vbs/kernels.hpp"

namespace vbs {

using Vec = std::vector<double>;

class Mat {
public:
    Mat() = default;
    Mat(int rows, int cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(static_cast<std::size_t>(rows) * cols, fill) {}

    static Mat identity(int n) {
        Mat m(n, n);
        for (int i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }

    int rows() const { return rows_; }
    int cols() const { return cols_; }
    std::size_t size() const { return data_.size(); }

    double* data() { return data_.data(); }
    const double* data() const { return data_.data(); }
    double* row(int i) { return data_.data() + static_cast<std::size_t>(i) * cols_; }
    const double* row(int i) const { return data_.data() + static_cast<std::size_t>(i) * cols_; }

    double& operator()(int i, int j) { return data_[static_cast<std::size_t>(i) * cols_ + j]; }
    double operator()(int i, int j) const { return data_[static_cast<std::size_t>(i) * cols_ + j]; }

    bool same_shape(const Mat& o) const { return rows_ == o.rows_ && cols_ == o.cols_; }

private:
    int rows_ = 0;
    int cols_ = 0;
    std::vector<double> data_;
};

double dot(const Vec& x, const Vec& y);
void axpy(double a, const Vec& x, Vec& y);
Vec matvec(const Mat& a, const Vec& x);
void add_rank1(Mat& a, const Vec& x, const Vec& y, double alpha);
// x^T A x for square A
double quad_form(const Mat& a, const Vec& x);
double norm2(const Vec& x);
double max_abs(const Mat& a);
double max_abs_diff(const Mat& a, const Mat& b);
double max_abs_diff(const Vec& a, const Vec& b);
void symmetrize(Mat& a);
bool all_finite(const Mat& a);
bool all_finite(const Vec& a);

// Jitter rule used before factorizing precision matrices: 1e-10 * trace/dim.
double default_jitter(const Mat& a);

// Lower-triangular Cholesky of an SPD matrix. Throws std::runtime_error when
// the (jittered) matrix is not positive definite.
class Cholesky {
public:
    explicit Cholesky(const Mat& a, double jitter = 0.0);

    Vec solve(const Vec& b) const;
    Mat inverse() const;
    double log_det() const;  // log det of the factorized matrix
    const Mat& lower() const { return l_; }

private:
    Mat l_;
};

}  // namespace vbs
