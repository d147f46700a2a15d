#pragma once

// Change-variable search over binary shift histories: conditional tempering
// priors, the change posterior, greedy search with the shy emission variant,
// and vanilla / diversified beam search.

#include <cstdint>
#include <optional>
#include <vector>

#include "vbs/blr.hpp"

namespace vbs {

struct SearchConfig {
    double xi0 = 0.0;         // prior log-odds of a change
    double celbo_temp = 1.0;  // T >= 1, divides the score difference only
    int beam_size = 1;        // K
    BroadenConfig broaden;    // s=1 prior construction; broaden.beta is THE beta
    bool diversify = false;   // requires K to be a positive multiple of 3
    bool record_traces = false;

    // Weight recursion per expansion step. JointEvidence adds the branch's
    // tempered log evidence plus the Bernoulli prior log-mass, which after
    // per-step renormalization reproduces the exact trace posterior when
    // nothing is truncated. BernoulliFactor adds log Bern(s_t; m) literally;
    // it never re-ranks a surviving prefix on new data.
    enum class WeightRule { JointEvidence, BernoulliFactor };
    WeightRule weight_rule = WeightRule::JointEvidence;

    void validate() const;
};

struct Hypothesis {
    std::vector<BlrModel> models;     // one regressor per target dimension
    double log_weight = 0.0;          // log of normalized beam weight after truncation
    int family_id = 0;                // parent index at the latest expansion
    bool last_bit = false;            // most recent s_t
    std::vector<uint8_t> trace;       // s_{1:t} when recording is enabled
};

struct Beam {
    std::vector<Hypothesis> hyps;

    int size() const { return static_cast<int>(hyps.size()); }
    // Index of the highest-weight hypothesis (hyps are kept sorted, so 0).
    int dominant() const { return 0; }
    // Shannon entropy of the weight distribution, in nats.
    double entropy() const;
    void normalize();
};

Beam init_beam(std::vector<BlrModel> base_models, bool record_traces);

// Prior for the next step conditioned on the change bit: s=0 keeps the
// previous posterior, s=1 broadens it per cfg (base_prior required for the
// BfInterpolate mode).
GaussianNat conditional_prior(const GaussianNat& post_prev, bool change, const BroadenConfig& cfg,
                              const GaussianNat* base_prior = nullptr);

// m = sigmoid((score1 - score0)/T + xi0): Bernoulli parameter of the change
// posterior given the two branch scores (log evidences or CELBOs).
double change_posterior(double score0, double score1, const SearchConfig& cfg);

struct Expansion {
    std::vector<Hypothesis> children;  // 2K scored children, unnormalized log weights
    std::vector<double> parent_m;      // change posterior per parent
};

// Every parent splits into s_t in {0,1}; each child carries its branch's
// conditional prior already absorbed into an updated posterior, plus the
// unnormalized log weight per the configured rule. base_models supplies the
// BfInterpolate base prior.
Expansion expand(const Beam& beam, const std::vector<StreamBatch>& batch_dims,
                 const SearchConfig& cfg, const std::vector<BlrModel>& base_models);

// Top-K by weight, renormalized; ties resolved by parent index then s=0 first.
Beam vanilla_truncate(std::vector<Hypothesis> children, int k);

// Drop the bottom third of the 2K children, then pick K: first the best
// member of every surviving family, then fill the remaining slots by global
// rank. K must be a positive multiple of 3 and children.size() must be 2K.
Beam diverse_truncate(std::vector<Hypothesis> children, int k);

// One full time step: expand then truncate per cfg.
Beam beam_step(const Beam& beam, const std::vector<StreamBatch>& batch_dims,
               const SearchConfig& cfg, const std::vector<BlrModel>& base_models);

struct MixturePredictive {
    Vec weights;                                         // per hypothesis
    std::vector<std::vector<PredictiveGaussian>> comps;  // [hypothesis][target dim]
    int dominant = 0;

    double point_mean(int dim, bool dominant_only) const;
    double log_lik(int dim, double y) const;  // log of the mixture density
};

MixturePredictive beam_marginal_predict(const Beam& beam, const Vec& x_star);

// Greedy (K=1) search with hard half-threshold decisions; weight stays 1.
struct GreedyState {
    std::vector<BlrModel> models;
    std::vector<BlrModel> prev_models;  // posterior from just before the last step
    double last_m = 0.0;
    bool last_bit = false;
    int step = 0;
    std::vector<uint8_t> trace;
    bool record_trace = false;
};

GreedyState init_greedy(std::vector<BlrModel> base_models, bool record_trace = false);
void greedy_step(GreedyState& state, const std::vector<StreamBatch>& batch_dims,
                 const SearchConfig& cfg, const std::vector<BlrModel>& base_models);

// Shy variant: fitted parameters are emitted only when a segment closes.
struct ShyEmission {
    Vec mean;            // concatenated posterior means across target dims
    Vec stddev;          // matching posterior standard deviations
    int segment_end;     // last step index included in the segment
};

// Emission triggered by the most recent greedy step (a detected change frees
// the pre-change fit). Returns nullopt while the segment is still open.
std::optional<ShyEmission> shy_emit(const GreedyState& state);
// Final fit at stream end.
ShyEmission shy_final(const GreedyState& state);

}  // namespace vbs
