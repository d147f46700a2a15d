#pragma once

// Conjugate Bayesian linear regression: the likelihood engine behind every
// search method here. Exposes the three primitives a search needs: log
// evidence of a batch under a prior, the posterior update, and the
// predictive distribution. Updates run row by row in natural parameters
// with a Sherman-Morrison covariance recursion, so a scored update is
// O(d^2) per row.

#include <optional>
#include <vector>

#include "vbs/gaussian.hpp"

namespace vbs {

struct StreamBatch {
    Mat features;                  // n x d
    Vec targets;                   // n
    std::optional<Vec> raw_probs;  // pre-transform classification targets in [0,1]

    void validate() const;
    int rows() const { return features.rows(); }
    int dim() const { return features.cols(); }
};

struct PredictiveGaussian {
    double mean = 0.0;
    double var = 1.0;
};

class BlrModel {
public:
    BlrModel(GaussianNat weight_posterior, double noise_var);

    int dim() const { return weights_.dim(); }
    const GaussianNat& weights() const { return weights_; }
    double noise_var() const { return noise_var_; }

private:
    GaussianNat weights_;
    double noise_var_;
};

double gaussian_log_pdf(double y, double mean, double var);

double sigmoid(double a);
// log(sigmoid(a)) computed without overflow
double log_sigmoid(double a);

// Posterior after absorbing the batch (order-independent natural-parameter sums).
BlrModel blr_update(const BlrModel& m, const StreamBatch& batch);

// Exact log marginal likelihood of the batch under the model's current
// posterior-as-prior, chained row by row.
double blr_log_evidence(const BlrModel& m, const StreamBatch& batch);

struct ScoredUpdate {
    BlrModel model;
    double log_evidence;
};
// Single pass computing both of the above.
ScoredUpdate blr_update_scored(const BlrModel& m, const StreamBatch& batch);

// N(x*^T mu, sigma_n^2 + x*^T Sigma x*)
PredictiveGaussian blr_predict(const BlrModel& m, const Vec& x_star);

// log odds with declared fill values at the boundary probabilities
double logodds_encode(double p, double lo_fill, double hi_fill);
// Median of the logistic-normal push-forward of the predictive.
double logodds_decode_median(const PredictiveGaussian& a);

// Closed-form conditional ELBO for the linear-Gaussian likelihood:
// E_q[log p(y|X,theta)] - KL(q || prior). Equals blr_log_evidence at the
// exact posterior.
double celbo(const GaussianNat& q, const GaussianNat& prior, double noise_var,
             const StreamBatch& batch);

// Vector targets as independent per-dimension regressors over shared features.
std::vector<BlrModel> multi_target_update(const std::vector<BlrModel>& ms,
                                          const std::vector<StreamBatch>& per_dim);
double multi_target_log_evidence(const std::vector<BlrModel>& ms,
                                 const std::vector<StreamBatch>& per_dim);

}  // namespace vbs
