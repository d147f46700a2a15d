#include "vbs/gaussian.hpp"

#include <cmath>
#include <stdexcept>

namespace vbs {

namespace {
constexpr double kTwoPi = 6.283185307179586476925286766559;
}

GaussianNat::GaussianNat(Mat precision, Vec linear)
    : precision_(std::move(precision)), linear_(std::move(linear)), cache_(std::make_shared<Cache>()) {
    if (precision_.rows() != precision_.cols() || precision_.rows() == 0) {
        throw std::invalid_argument("GaussianNat: precision must be square and non-empty");
    }
    if (linear_.size() != static_cast<std::size_t>(precision_.rows())) {
        throw std::invalid_argument("GaussianNat: linear term dimension mismatch");
    }
    if (!all_finite(precision_) || !all_finite(linear_)) {
        throw std::invalid_argument("GaussianNat: non-finite parameters");
    }
    double asym = 0.0;
    for (int i = 0; i < precision_.rows(); ++i) {
        for (int j = i + 1; j < precision_.cols(); ++j) {
            asym = std::max(asym, std::abs(precision_(i, j) - precision_(j, i)));
        }
    }
    if (asym > 1e-12 * (1.0 + max_abs(precision_))) {
        throw std::invalid_argument("GaussianNat: precision not symmetric");
    }
    symmetrize(precision_);
}

GaussianNat::GaussianNat(Mat precision, Vec linear, Moments precomputed)
    : precision_(std::move(precision)), linear_(std::move(linear)), cache_(std::make_shared<Cache>()) {
    std::call_once(cache_->flag, [&] { cache_->m = std::move(precomputed); });
}

GaussianNat GaussianNat::isotropic(int dim, double variance) {
    if (dim <= 0) throw std::invalid_argument("GaussianNat::isotropic: dim must be positive");
    if (!(variance > 0.0) || !std::isfinite(variance)) {
        throw std::invalid_argument("GaussianNat::isotropic: variance must be positive");
    }
    Mat prec(dim, dim);
    for (int i = 0; i < dim; ++i) prec(i, i) = 1.0 / variance;
    return GaussianNat(std::move(prec), Vec(static_cast<std::size_t>(dim), 0.0));
}

GaussianNat GaussianNat::from_moments(const Vec& mean, const Mat& cov) {
    Cholesky chol(cov, default_jitter(cov));
    Mat prec = chol.inverse();
    Vec eta = matvec(prec, mean);
    Moments m{mean, cov, -chol.log_det()};
    return GaussianNat(std::move(prec), std::move(eta), std::move(m));
}

const GaussianNat::Moments& GaussianNat::moments() const {
    std::call_once(cache_->flag, [&] {
        Cholesky chol(precision_, default_jitter(precision_));
        Moments m;
        m.mean = chol.solve(linear_);
        m.cov = chol.inverse();
        m.log_det_precision = chol.log_det();
        cache_->m = std::move(m);
    });
    return *cache_->m;
}

const Vec& GaussianNat::mean() const { return moments().mean; }
const Mat& GaussianNat::cov() const { return moments().cov; }
double GaussianNat::log_det_precision() const { return moments().log_det_precision; }
bool GaussianNat::moments_cached() const { return cache_->m.has_value(); }

double GaussianNat::entropy() const {
    const double d = dim();
    return 0.5 * d * (1.0 + std::log(kTwoPi)) - 0.5 * log_det_precision();
}

GaussianNat detail_make_with_moments(Mat precision, Vec linear, Vec mean, Mat cov,
                                     double log_det_precision) {
    GaussianNat::Moments m{std::move(mean), std::move(cov), log_det_precision};
    return GaussianNat(std::move(precision), std::move(linear), std::move(m));
}

GaussianNat temper(const GaussianNat& g, double beta) {
    if (!std::isfinite(beta) || beta <= 0.0) {
        throw std::invalid_argument("temper: beta must be finite and positive");
    }
    if (beta == 1.0) return g;
    Mat prec = g.precision();
    Vec eta = g.linear();
    kernels::scale(beta, prec.data(), prec.size());
    kernels::scale(beta, eta.data(), eta.size());
    if (g.moments_cached()) {
        // Mean is invariant; covariance and log-determinant rescale in closed form.
        GaussianNat::Moments m;
        m.mean = g.mean();
        m.cov = g.cov();
        kernels::scale(1.0 / beta, m.cov.data(), m.cov.size());
        m.log_det_precision = g.log_det_precision() + g.dim() * std::log(beta);
        return GaussianNat(std::move(prec), std::move(eta), std::move(m));
    }
    return GaussianNat(std::move(prec), std::move(eta));
}

GaussianNat additive_broaden(const GaussianNat& g, double diffusion, double dt) {
    if (!std::isfinite(diffusion) || diffusion < 0.0) {
        throw std::invalid_argument("additive_broaden: diffusion must be finite and >= 0");
    }
    if (!std::isfinite(dt) || dt <= 0.0) {
        throw std::invalid_argument("additive_broaden: dt must be finite and positive");
    }
    if (diffusion == 0.0) return g;
    Mat cov = g.cov();
    const double add = diffusion * dt;
    for (int i = 0; i < cov.rows(); ++i) cov(i, i) += add;
    Cholesky chol(cov, 0.0);
    Mat prec = chol.inverse();
    Vec eta = matvec(prec, g.mean());
    GaussianNat::Moments m{g.mean(), std::move(cov), -chol.log_det()};
    return GaussianNat(std::move(prec), std::move(eta), std::move(m));
}

double directional_entropy(const GaussianNat& g, const Vec& u) {
    if (u.size() != static_cast<std::size_t>(g.dim())) {
        throw std::invalid_argument("directional_entropy: direction dimension mismatch");
    }
    if (std::abs(norm2(u) - 1.0) > 1e-10) {
        throw std::invalid_argument("directional_entropy: direction must be a unit vector");
    }
    const double var = quad_form(g.cov(), u);
    return 0.5 * std::log(kTwoPi * std::exp(1.0) * var);
}

Mat sm_rank1_inverse_update(const Mat& a_inv, const Vec& u, const Vec& v) {
    if (a_inv.rows() != a_inv.cols()) {
        throw std::invalid_argument("sm_rank1_inverse_update: matrix not square");
    }
    if (u.size() != static_cast<std::size_t>(a_inv.rows()) || u.size() != v.size()) {
        throw std::invalid_argument("sm_rank1_inverse_update: vector dimension mismatch");
    }
    Vec w = matvec(a_inv, u);   // A^{-1} u
    Vec z = matvec(a_inv, v);   // A^{-T} v for symmetric A
    const double denom = 1.0 + dot(v, w);
    if (!std::isfinite(denom) || std::abs(denom) <= 1e-12) {
        throw std::runtime_error("sm_rank1_inverse_update: singular update (1 + v^T A^{-1} u ~ 0)");
    }
    Mat out = a_inv;
    add_rank1(out, w, z, -1.0 / denom);
    return out;
}

void BroadenConfig::validate() const {
    switch (mode) {
        case Mode::Multiplicative:
            if (!std::isfinite(beta) || beta <= 0.0 || beta > 1.0) {
                throw std::invalid_argument("BroadenConfig: multiplicative mode needs 0 < beta <= 1");
            }
            break;
        case Mode::Additive:
            if (!std::isfinite(diffusion) || diffusion < 0.0) {
                throw std::invalid_argument("BroadenConfig: additive mode needs diffusion >= 0");
            }
            if (!std::isfinite(dt) || dt <= 0.0) {
                throw std::invalid_argument("BroadenConfig: additive mode needs dt > 0");
            }
            break;
        case Mode::BfInterpolate:
            if (!std::isfinite(beta) || beta <= 0.0 || beta > 1.0) {
                throw std::invalid_argument("BroadenConfig: bf mode needs 0 < beta <= 1");
            }
            break;
    }
}

GaussianNat broaden(const GaussianNat& g, const BroadenConfig& cfg, const GaussianNat* base_prior) {
    cfg.validate();
    switch (cfg.mode) {
        case BroadenConfig::Mode::Multiplicative:
            return temper(g, cfg.beta);
        case BroadenConfig::Mode::Additive:
            return additive_broaden(g, cfg.diffusion, cfg.dt);
        case BroadenConfig::Mode::BfInterpolate: {
            if (base_prior == nullptr) {
                throw std::invalid_argument("broaden: bf mode requires a base prior");
            }
            if (base_prior->dim() != g.dim()) {
                throw std::invalid_argument("broaden: base prior dimension mismatch");
            }
            Mat prec = base_prior->precision();
            Vec eta = base_prior->linear();
            kernels::scale(1.0 - cfg.beta, prec.data(), prec.size());
            kernels::scale(1.0 - cfg.beta, eta.data(), eta.size());
            kernels::axpy(cfg.beta, g.precision().data(), prec.data(), prec.size());
            kernels::axpy(cfg.beta, g.linear().data(), eta.data(), eta.size());
            return GaussianNat(std::move(prec), std::move(eta));
        }
    }
    throw std::logic_error("broaden: unreachable");
}

}  // namespace vbs
