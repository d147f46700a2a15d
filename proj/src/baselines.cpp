#include "vbs/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace vbs {

namespace {

double log_sum_exp(const std::vector<double>& v) {
    double m = -std::numeric_limits<double>::infinity();
    for (double x : v) m = std::max(m, x);
    if (!std::isfinite(m)) return m;
    double s = 0.0;
    for (double x : v) s += std::exp(x - m);
    return m + std::log(s);
}

double joint_evidence(std::vector<BlrModel>& models, const std::vector<StreamBatch>& batch_dims) {
    if (models.size() != batch_dims.size()) {
        throw std::invalid_argument("baselines: model/batch dimension count mismatch");
    }
    double s = 0.0;
    for (std::size_t k = 0; k < models.size(); ++k) {
        ScoredUpdate u = blr_update_scored(models[k], batch_dims[k]);
        s += u.log_evidence;
        models[k] = std::move(u.model);
    }
    return s;
}

}  // namespace

void BocdConfig::validate() const {
    if (!(hazard >= 0.0 && hazard <= 1.0)) {
        throw std::invalid_argument("BocdConfig: hazard must lie in [0,1]");
    }
    if (max_kept < 1) throw std::invalid_argument("BocdConfig: max_kept must be >= 1");
}

BocdState BocdState::init(std::vector<BlrModel> base_models) {
    if (base_models.empty()) throw std::invalid_argument("BocdState: no models");
    BocdState s;
    s.runs.push_back(BocdRun{0, 0.0, std::move(base_models)});
    return s;
}

double BocdState::entropy() const {
    double h = 0.0;
    for (const auto& r : runs) {
        const double w = std::exp(r.log_prob);
        if (w > 0.0) h -= w * r.log_prob;
    }
    return h;
}

BocdState bocd_step(const BocdState& state, const std::vector<StreamBatch>& batch_dims,
                    const BocdConfig& cfg, const std::vector<BlrModel>& base_models) {
    cfg.validate();
    if (state.runs.empty()) throw std::invalid_argument("bocd_step: empty state");

    const double h = cfg.hazard;
    std::vector<BocdRun> next;
    next.reserve(state.runs.size() + 1);

    // Growth: each run absorbs the batch and advances by one.
    if (h < 1.0) {
        const double log_keep = std::log1p(-h);
        for (const auto& run : state.runs) {
            std::vector<BlrModel> models = run.models;
            const double ev = joint_evidence(models, batch_dims);
            next.push_back(BocdRun{run.run_length + 1, run.log_prob + log_keep + ev, std::move(models)});
        }
    }

    // Changepoint: run 0 restarts from the base prior.
    if (h > 0.0) {
        std::vector<double> in;
        in.reserve(state.runs.size());
        for (const auto& run : state.runs) in.push_back(run.log_prob);
        std::vector<BlrModel> models = base_models;
        const double ev0 = joint_evidence(models, batch_dims);
        next.push_back(BocdRun{0, log_sum_exp(in) + std::log(h) + ev0, std::move(models)});
    }

    // Normalize, keep the top max_kept by probability, renormalize.
    std::vector<double> lp;
    lp.reserve(next.size());
    for (const auto& r : next) lp.push_back(r.log_prob);
    const double z = log_sum_exp(lp);
    if (!std::isfinite(z)) throw std::runtime_error("bocd_step: run-length normalizer not finite");
    for (auto& r : next) r.log_prob -= z;

    std::stable_sort(next.begin(), next.end(), [](const BocdRun& a, const BocdRun& b) {
        if (a.log_prob != b.log_prob) return a.log_prob > b.log_prob;
        return a.run_length < b.run_length;
    });
    if (static_cast<int>(next.size()) > cfg.max_kept) {
        next.resize(static_cast<std::size_t>(cfg.max_kept));
        std::vector<double> kept;
        kept.reserve(next.size());
        for (const auto& r : next) kept.push_back(r.log_prob);
        const double z2 = log_sum_exp(kept);
        for (auto& r : next) r.log_prob -= z2;
    }

    BocdState out;
    out.runs = std::move(next);
    return out;
}

MixturePredictive bocd_predict(const BocdState& state, const Vec& x_star) {
    if (state.runs.empty()) throw std::invalid_argument("bocd_predict: empty state");
    MixturePredictive mp;
    mp.weights.reserve(state.runs.size());
    mp.comps.reserve(state.runs.size());
    for (const auto& r : state.runs) {
        mp.weights.push_back(std::exp(r.log_prob));
        std::vector<PredictiveGaussian> per_dim;
        per_dim.reserve(r.models.size());
        for (const auto& m : r.models) per_dim.push_back(blr_predict(m, x_star));
        mp.comps.push_back(std::move(per_dim));
    }
    mp.dominant = 0;
    return mp;
}

void BfConfig::validate() const {
    if (!(beta > 0.0 && beta <= 1.0) || !std::isfinite(beta)) {
        throw std::invalid_argument("BfConfig: beta must lie in (0,1]");
    }
}

GaussianNat bf_prior(const GaussianNat& post_prev, const BfConfig& cfg) {
    cfg.validate();
    if (post_prev.dim() != cfg.base_prior.dim()) {
        throw std::invalid_argument("bf_prior: dimension mismatch");
    }
    if (cfg.beta == 1.0) return post_prev;
    Mat prec = cfg.base_prior.precision();
    Vec eta = cfg.base_prior.linear();
    kernels::scale(1.0 - cfg.beta, prec.data(), prec.size());
    kernels::scale(1.0 - cfg.beta, eta.data(), eta.size());
    kernels::axpy(cfg.beta, post_prev.precision().data(), prec.data(), prec.size());
    kernels::axpy(cfg.beta, post_prev.linear().data(), eta.data(), eta.size());
    return GaussianNat(std::move(prec), std::move(eta));
}

BlrModel bf_step(const BlrModel& post_prev, const BfConfig& cfg, const StreamBatch& batch) {
    BlrModel interpolated(bf_prior(post_prev.weights(), cfg), post_prev.noise_var());
    return blr_update(interpolated, batch);
}

BlrModel vcl_step(const BlrModel& post_prev, const StreamBatch& batch) {
    return blr_update(post_prev, batch);
}

double lp_predict(const BlrModel& post, const Vec& x_star) {
    return dot(x_star, post.weights().mean());
}

BlrModel independent_step(const BlrModel& base, const StreamBatch& batch) {
    return blr_update(base, batch);
}

}  // namespace vbs
