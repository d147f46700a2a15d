#include "vbs/blr.hpp"

#include <cmath>
#include <stdexcept>

namespace vbs {

namespace {
constexpr double kLogTwoPi = 1.8378770664093454835606594728112;

double softplus(double x) {
    if (x > 36.0) return x;
    if (x < -36.0) return std::exp(x);
    return std::log1p(std::exp(x));
}

void check_same_features(const std::vector<StreamBatch>& per_dim) {
    for (std::size_t k = 1; k < per_dim.size(); ++k) {
        if (!per_dim[k].features.same_shape(per_dim[0].features) ||
            max_abs_diff(per_dim[k].features, per_dim[0].features) != 0.0) {
            throw std::invalid_argument("multi_target: per-dimension batches must share features");
        }
    }
}
}  // namespace

void StreamBatch::validate() const {
    if (features.rows() < 1) throw std::invalid_argument("StreamBatch: needs at least one row");
    if (targets.size() != static_cast<std::size_t>(features.rows())) {
        throw std::invalid_argument("StreamBatch: target count != feature rows");
    }
    if (!all_finite(features) || !all_finite(targets)) {
        throw std::invalid_argument("StreamBatch: non-finite entries");
    }
    if (raw_probs) {
        if (raw_probs->size() != targets.size()) {
            throw std::invalid_argument("StreamBatch: raw_probs count != rows");
        }
        for (double p : *raw_probs) {
            if (!(p >= 0.0 && p <= 1.0)) {
                throw std::invalid_argument("StreamBatch: raw_probs must lie in [0,1]");
            }
        }
    }
}

BlrModel::BlrModel(GaussianNat weight_posterior, double noise_var)
    : weights_(std::move(weight_posterior)), noise_var_(noise_var) {
    if (!(noise_var > 0.0) || !std::isfinite(noise_var)) {
        throw std::invalid_argument("BlrModel: noise variance must be positive");
    }
}

double gaussian_log_pdf(double y, double mean, double var) {
    const double d = y - mean;
    return -0.5 * (kLogTwoPi + std::log(var) + d * d / var);
}

double sigmoid(double a) {
    if (a >= 0.0) return 1.0 / (1.0 + std::exp(-a));
    const double e = std::exp(a);
    return e / (1.0 + e);
}

double log_sigmoid(double a) { return -softplus(-a); }

ScoredUpdate blr_update_scored(const BlrModel& m, const StreamBatch& batch) {
    batch.validate();
    if (batch.dim() != m.dim()) throw std::invalid_argument("blr: feature dimension mismatch");

    const double sn2 = m.noise_var();
    const double inv_sn2 = 1.0 / sn2;
    const int d = m.dim();
    const int n = batch.rows();

    Mat prec = m.weights().precision();
    Vec eta = m.weights().linear();
    Vec mean = m.weights().mean();
    Mat cov = m.weights().cov();
    double log_det_prec = m.weights().log_det_precision();

    double log_ev = 0.0;
    Vec x(static_cast<std::size_t>(d));
    for (int i = 0; i < n; ++i) {
        const double* row = batch.features.row(i);
        for (int j = 0; j < d; ++j) x[static_cast<std::size_t>(j)] = row[j];
        const double y = batch.targets[static_cast<std::size_t>(i)];

        Vec w = matvec(cov, x);                       // Sigma x
        const double xsx = dot(x, w);                 // x^T Sigma x
        const double pred_mean = dot(x, mean);
        log_ev += gaussian_log_pdf(y, pred_mean, sn2 + xsx);

        // Natural parameters accumulate exactly; moments follow by
        // Sherman-Morrison and the matrix determinant lemma.
        add_rank1(prec, x, x, inv_sn2);
        axpy(inv_sn2 * y, x, eta);
        add_rank1(cov, w, w, -1.0 / (sn2 + xsx));
        symmetrize(cov);
        log_det_prec += std::log1p(inv_sn2 * xsx);
        mean = matvec(cov, eta);
    }
    symmetrize(prec);
    GaussianNat post = detail_make_with_moments(std::move(prec), std::move(eta),
                                                std::move(mean), std::move(cov), log_det_prec);
    return ScoredUpdate{BlrModel(std::move(post), sn2), log_ev};
}

BlrModel blr_update(const BlrModel& m, const StreamBatch& batch) {
    return blr_update_scored(m, batch).model;
}

double blr_log_evidence(const BlrModel& m, const StreamBatch& batch) {
    return blr_update_scored(m, batch).log_evidence;
}

PredictiveGaussian blr_predict(const BlrModel& m, const Vec& x_star) {
    if (x_star.size() != static_cast<std::size_t>(m.dim())) {
        throw std::invalid_argument("blr_predict: feature dimension mismatch");
    }
    PredictiveGaussian p;
    p.mean = dot(x_star, m.weights().mean());
    p.var = m.noise_var() + quad_form(m.weights().cov(), x_star);
    return p;
}

double logodds_encode(double p, double lo_fill, double hi_fill) {
    if (!(p >= 0.0 && p <= 1.0)) {
        throw std::invalid_argument("logodds_encode: probability outside [0,1]");
    }
    if (!(lo_fill < hi_fill)) {
        throw std::invalid_argument("logodds_encode: lo_fill must be < hi_fill");
    }
    if (p == 0.0) return lo_fill;
    if (p == 1.0) return hi_fill;
    return std::log(p) - std::log1p(-p);
}

double logodds_decode_median(const PredictiveGaussian& a) { return sigmoid(a.mean); }

double celbo(const GaussianNat& q, const GaussianNat& prior, double noise_var,
             const StreamBatch& batch) {
    batch.validate();
    if (q.dim() != prior.dim() || q.dim() != batch.dim()) {
        throw std::invalid_argument("celbo: dimension mismatch");
    }
    if (!(noise_var > 0.0) || !std::isfinite(noise_var)) {
        throw std::invalid_argument("celbo: noise variance must be positive");
    }
    const int d = q.dim();
    const Vec& mq = q.mean();
    const Mat& sq = q.cov();

    // Expected log-likelihood under q, closed form for the linear-Gaussian model.
    double ell = 0.0;
    Vec x(static_cast<std::size_t>(d));
    for (int i = 0; i < batch.rows(); ++i) {
        const double* row = batch.features.row(i);
        for (int j = 0; j < d; ++j) x[static_cast<std::size_t>(j)] = row[j];
        const double resid = batch.targets[static_cast<std::size_t>(i)] - dot(x, mq);
        ell += -0.5 * (kLogTwoPi + std::log(noise_var)) -
               (resid * resid + quad_form(sq, x)) / (2.0 * noise_var);
    }

    // KL(q || prior) for Gaussians.
    const Mat& lp = prior.precision();
    const double trace_term = kernels::dot(lp.data(), sq.data(), sq.size());
    Vec delta = prior.mean();
    axpy(-1.0, mq, delta);
    const double maha = quad_form(lp, delta);
    const double kl = 0.5 * (trace_term + maha - d + q.log_det_precision() - prior.log_det_precision());

    return ell - kl;
}

std::vector<BlrModel> multi_target_update(const std::vector<BlrModel>& ms,
                                          const std::vector<StreamBatch>& per_dim) {
    if (ms.size() != per_dim.size()) {
        throw std::invalid_argument("multi_target_update: model/batch count mismatch");
    }
    if (ms.empty()) throw std::invalid_argument("multi_target_update: empty model list");
    check_same_features(per_dim);
    std::vector<BlrModel> out;
    out.reserve(ms.size());
    for (std::size_t k = 0; k < ms.size(); ++k) out.push_back(blr_update(ms[k], per_dim[k]));
    return out;
}

double multi_target_log_evidence(const std::vector<BlrModel>& ms,
                                 const std::vector<StreamBatch>& per_dim) {
    if (ms.size() != per_dim.size()) {
        throw std::invalid_argument("multi_target_log_evidence: model/batch count mismatch");
    }
    check_same_features(per_dim);
    double s = 0.0;
    for (std::size_t k = 0; k < ms.size(); ++k) s += blr_log_evidence(ms[k], per_dim[k]);
    return s;
}

}  // namespace vbs
