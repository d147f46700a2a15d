#pragma once

// Comparison methods sharing the BLR engine: Bayesian online changepoint
// detection over run lengths, Bayesian forgetting, variational continual
// learning, Laplace propagation (mode-only predictions), and independent
// batch learning.

#include <vector>

#include "vbs/search.hpp"

namespace vbs {

struct BocdConfig {
    double hazard = 0.1;           // per-step changepoint probability
    int max_kept = 6;              // run lengths retained after truncation
    int change_run_threshold = 50; // MAP run below this reports a change

    void validate() const;
};

struct BocdRun {
    int run_length = 0;
    double log_prob = 0.0;
    std::vector<BlrModel> models;
};

struct BocdState {
    std::vector<BocdRun> runs;  // sorted by probability descending

    static BocdState init(std::vector<BlrModel> base_models);
    int map_run_length() const { return runs.front().run_length; }
    double entropy() const;
};

// One run-length recursion step: every run grows with mass (1-h)*pi_r*ev_r,
// run 0 restarts from the base prior with mass h*ev_base (summed over the
// incoming runs), then the list is truncated to the top max_kept by
// probability and renormalized.
BocdState bocd_step(const BocdState& state, const std::vector<StreamBatch>& batch_dims,
                    const BocdConfig& cfg, const std::vector<BlrModel>& base_models);

// Run-length-weighted predictive mixture.
MixturePredictive bocd_predict(const BocdState& state, const Vec& x_star);

struct BfConfig {
    double beta = 0.9;         // forgetting rate; 1 reproduces VCL exactly
    GaussianNat base_prior;

    void validate() const;
};

// Geometric interpolation toward the base prior in natural parameters,
// then a Bayes update.
GaussianNat bf_prior(const GaussianNat& post_prev, const BfConfig& cfg);
BlrModel bf_step(const BlrModel& post_prev, const BfConfig& cfg, const StreamBatch& batch);

// Previous posterior as the next prior, no broadening ever.
BlrModel vcl_step(const BlrModel& post_prev, const StreamBatch& batch);

// Mode-only prediction; shares VCL's recursion.
double lp_predict(const BlrModel& post, const Vec& x_star);

// Fresh posterior from the base prior each step.
BlrModel independent_step(const BlrModel& base, const StreamBatch& batch);

}  // namespace vbs
