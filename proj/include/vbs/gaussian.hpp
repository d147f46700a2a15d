#pragma once

// Multivariate Gaussians in natural parameters (precision L, linear term
// eta = L*mu). The precision form is canonical; mean and covariance are
// write-once caches filled on first use, so values stay safe to share
// across threads after construction.

#include <memory>
#include <mutex>
#include <optional>

#include "vbs/dense.hpp"

namespace vbs {

class GaussianNat {
public:
    // Validates shape, finiteness and symmetry (1e-12 relative), then stores
    // the symmetrized precision. Positive definiteness is checked at the
    // first solve, after adding the default diagonal jitter.
    GaussianNat(Mat precision, Vec linear);

    static GaussianNat isotropic(int dim, double variance);
    static GaussianNat from_moments(const Vec& mean, const Mat& cov);

    int dim() const { return precision_.rows(); }
    const Mat& precision() const { return precision_; }
    const Vec& linear() const { return linear_; }

    const Vec& mean() const;
    const Mat& cov() const;
    double log_det_precision() const;
    bool moments_cached() const;

    // Differential entropy: d/2*(1+log 2pi) - 1/2*log det(precision).
    double entropy() const;

private:
    struct Moments {
        Vec mean;
        Mat cov;
        double log_det_precision = 0.0;
    };
    struct Cache {
        std::once_flag flag;
        std::optional<Moments> m;
    };

    GaussianNat(Mat precision, Vec linear, Moments precomputed);

    const Moments& moments() const;

    Mat precision_;
    Vec linear_;
    std::shared_ptr<Cache> cache_;

    friend GaussianNat temper(const GaussianNat&, double);
    friend GaussianNat additive_broaden(const GaussianNat&, double, double);
    friend GaussianNat detail_make_with_moments(Mat, Vec, Vec, Mat, double);
};

// Internal fast path for update recursions that already maintain the
// moments; callers are responsible for consistency of the cache.
GaussianNat detail_make_with_moments(Mat precision, Vec linear, Vec mean, Mat cov,
                                     double log_det_precision);

// Raise the density to the power beta and renormalize: precision and linear
// term scale element-wise by beta, so the mean is unchanged and the
// covariance widens by 1/beta. Requires finite beta > 0.
GaussianNat temper(const GaussianNat& g, double beta);

// Gaussian transition kernel with unit transition matrix: covariance gains
// diffusion*dt on the diagonal, mean unchanged, returned with recomputed
// precision.
GaussianNat additive_broaden(const GaussianNat& g, double diffusion, double dt);

// 1/2*log(2*pi*e*u^T Sigma u) for a unit direction u.
double directional_entropy(const GaussianNat& g, const Vec& u);

// Sherman-Morrison: (A + u v^T)^{-1} from A^{-1}.
Mat sm_rank1_inverse_update(const Mat& a_inv, const Vec& u, const Vec& v);

struct BroadenConfig {
    enum class Mode { Multiplicative, Additive, BfInterpolate };
    Mode mode = Mode::Multiplicative;
    double beta = 0.5;       // inverse temperature, Multiplicative/BfInterpolate
    double diffusion = 1.0;  // D, Additive
    double dt = 1.0;         // time spacing, Additive

    void validate() const;
};

// Applies the configured broadening for the s=1 branch. BfInterpolate mixes
// toward base_prior in natural parameters ((1-beta)*prior0 + beta*previous)
// and requires base_prior != nullptr.
GaussianNat broaden(const GaussianNat& g, const BroadenConfig& cfg,
                    const GaussianNat* base_prior = nullptr);

}  // namespace vbs
