#include "vbs/search.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace vbs {

namespace {

double softplus(double x) {
    if (x > 36.0) return x;
    if (x < -36.0) return std::exp(x);
    return std::log1p(std::exp(x));
}

double log_sum_exp(const std::vector<double>& v) {
    double m = -std::numeric_limits<double>::infinity();
    for (double x : v) m = std::max(m, x);
    if (!std::isfinite(m)) return m;
    double s = 0.0;
    for (double x : v) s += std::exp(x - m);
    return m + std::log(s);
}

// Deterministic order: weight descending, then lower parent index, then
// s_t=0 before s_t=1.
bool child_before(const Hypothesis& a, const Hypothesis& b) {
    if (a.log_weight != b.log_weight) return a.log_weight > b.log_weight;
    if (a.family_id != b.family_id) return a.family_id < b.family_id;
    return a.last_bit < b.last_bit;
}

void normalize_hyps(std::vector<Hypothesis>& hyps) {
    std::vector<double> lw;
    lw.reserve(hyps.size());
    for (const auto& h : hyps) lw.push_back(h.log_weight);
    const double z = log_sum_exp(lw);
    if (!std::isfinite(z)) throw std::runtime_error("beam: weight normalizer is not finite");
    for (auto& h : hyps) h.log_weight -= z;
}

std::vector<BlrModel> branch_models(const std::vector<BlrModel>& models, bool change,
                                    const SearchConfig& cfg,
                                    const std::vector<BlrModel>& base_models) {
    if (!change) return models;
    std::vector<BlrModel> out;
    out.reserve(models.size());
    for (std::size_t k = 0; k < models.size(); ++k) {
        out.emplace_back(
            conditional_prior(models[k].weights(), true, cfg.broaden, &base_models[k].weights()),
            models[k].noise_var());
    }
    return out;
}

struct BranchResult {
    std::vector<BlrModel> posterior;
    double score = 0.0;  // summed log evidence across target dims
};

BranchResult score_branch(const std::vector<BlrModel>& prior_models,
                          const std::vector<StreamBatch>& batch_dims) {
    if (prior_models.size() != batch_dims.size()) {
        throw std::invalid_argument("search: model/batch dimension count mismatch");
    }
    BranchResult r;
    r.posterior.reserve(prior_models.size());
    for (std::size_t k = 0; k < prior_models.size(); ++k) {
        ScoredUpdate u = blr_update_scored(prior_models[k], batch_dims[k]);
        r.score += u.log_evidence;
        r.posterior.push_back(std::move(u.model));
    }
    return r;
}

}  // namespace

void SearchConfig::validate() const {
    if (beam_size < 1) throw std::invalid_argument("SearchConfig: beam size must be >= 1");
    if (!(celbo_temp >= 1.0) || !std::isfinite(celbo_temp)) {
        throw std::invalid_argument("SearchConfig: celbo temperature must be >= 1");
    }
    if (!std::isfinite(xi0)) throw std::invalid_argument("SearchConfig: xi0 must be finite");
    if (diversify && (beam_size % 3 != 0)) {
        throw std::invalid_argument("SearchConfig: diversified truncation needs K to be a multiple of 3");
    }
    broaden.validate();
}

double Beam::entropy() const {
    double h = 0.0;
    for (const auto& hyp : hyps) {
        const double w = std::exp(hyp.log_weight);
        if (w > 0.0) h -= w * hyp.log_weight;
    }
    return h;
}

void Beam::normalize() { normalize_hyps(hyps); }

Beam init_beam(std::vector<BlrModel> base_models, bool record_traces) {
    if (base_models.empty()) throw std::invalid_argument("init_beam: no models");
    Beam b;
    Hypothesis h;
    h.models = std::move(base_models);
    h.log_weight = 0.0;
    h.family_id = 0;
    h.last_bit = false;
    if (record_traces) h.trace.reserve(64);
    b.hyps.push_back(std::move(h));
    return b;
}

GaussianNat conditional_prior(const GaussianNat& post_prev, bool change, const BroadenConfig& cfg,
                              const GaussianNat* base_prior) {
    if (!change) return post_prev;
    return broaden(post_prev, cfg, base_prior);
}

double change_posterior(double score0, double score1, const SearchConfig& cfg) {
    if (!std::isfinite(score0) || !std::isfinite(score1)) {
        throw std::invalid_argument("change_posterior: scores must be finite");
    }
    return sigmoid((score1 - score0) / cfg.celbo_temp + cfg.xi0);
}

Expansion expand(const Beam& beam, const std::vector<StreamBatch>& batch_dims,
                 const SearchConfig& cfg, const std::vector<BlrModel>& base_models) {
    if (beam.hyps.empty()) throw std::invalid_argument("expand: empty beam");
    cfg.validate();

    const double t = cfg.celbo_temp;
    // log prior mass of each branch from the log-odds xi0
    const double log_p1 = -softplus(-cfg.xi0);
    const double log_p0 = -softplus(cfg.xi0);

    Expansion out;
    out.children.reserve(beam.hyps.size() * 2);
    out.parent_m.reserve(beam.hyps.size());

    for (std::size_t pi = 0; pi < beam.hyps.size(); ++pi) {
        const Hypothesis& parent = beam.hyps[pi];

        BranchResult keep = score_branch(parent.models, batch_dims);
        BranchResult change =
            score_branch(branch_models(parent.models, true, cfg, base_models), batch_dims);

        const double logit = (change.score - keep.score) / t + cfg.xi0;
        out.parent_m.push_back(sigmoid(logit));

        double lw0, lw1;
        if (cfg.weight_rule == SearchConfig::WeightRule::JointEvidence) {
            lw0 = parent.log_weight + keep.score / t + log_p0;
            lw1 = parent.log_weight + change.score / t + log_p1;
        } else {
            lw0 = parent.log_weight - softplus(logit);    // log(1-m)
            lw1 = parent.log_weight - softplus(-logit);   // log m
        }

        for (int bit = 0; bit <= 1; ++bit) {
            Hypothesis child;
            child.models = bit ? std::move(change.posterior) : std::move(keep.posterior);
            child.log_weight = bit ? lw1 : lw0;
            child.family_id = static_cast<int>(pi);
            child.last_bit = bit != 0;
            if (cfg.record_traces) {
                child.trace = parent.trace;
                child.trace.push_back(static_cast<uint8_t>(bit));
            }
            out.children.push_back(std::move(child));
        }
    }
    return out;
}

Beam vanilla_truncate(std::vector<Hypothesis> children, int k) {
    if (children.empty()) throw std::invalid_argument("vanilla_truncate: no children");
    if (k < 1) throw std::invalid_argument("vanilla_truncate: k must be >= 1");
    std::stable_sort(children.begin(), children.end(), child_before);
    if (static_cast<int>(children.size()) > k) children.resize(static_cast<std::size_t>(k));
    Beam b;
    b.hyps = std::move(children);
    b.normalize();
    return b;
}

Beam diverse_truncate(std::vector<Hypothesis> children, int k) {
    if (k < 1 || k % 3 != 0) {
        throw std::invalid_argument("diverse_truncate: k must be a positive multiple of 3");
    }
    if (static_cast<int>(children.size()) != 2 * k) {
        throw std::invalid_argument("diverse_truncate: expected exactly 2K children");
    }
    std::stable_sort(children.begin(), children.end(), child_before);

    // Drop the bottom third of the 2K children.
    children.resize(children.size() - static_cast<std::size_t>(2 * k / 3));

    // Pass 1: best member of every surviving family, in rank order.
    // Pass 2: fill the remaining slots by global rank.
    std::vector<char> taken(children.size(), 0);
    std::vector<char> family_seen(static_cast<std::size_t>(k), 0);
    std::vector<std::size_t> picked;
    picked.reserve(static_cast<std::size_t>(k));
    for (std::size_t i = 0; i < children.size() && static_cast<int>(picked.size()) < k; ++i) {
        const int fam = children[i].family_id;
        if (!family_seen[static_cast<std::size_t>(fam)]) {
            family_seen[static_cast<std::size_t>(fam)] = 1;
            taken[i] = 1;
            picked.push_back(i);
        }
    }
    for (std::size_t i = 0; i < children.size() && static_cast<int>(picked.size()) < k; ++i) {
        if (!taken[i]) {
            taken[i] = 1;
            picked.push_back(i);
        }
    }

    std::sort(picked.begin(), picked.end());  // restores rank order among the selected
    Beam b;
    b.hyps.reserve(picked.size());
    for (std::size_t idx : picked) b.hyps.push_back(std::move(children[idx]));
    b.normalize();
    return b;
}

Beam beam_step(const Beam& beam, const std::vector<StreamBatch>& batch_dims,
               const SearchConfig& cfg, const std::vector<BlrModel>& base_models) {
    Expansion e = expand(beam, batch_dims, cfg, base_models);
    // The diversified rule is defined on a saturated beam (exactly 2K
    // children); while the beam is still filling up, plain top-K applies.
    if (cfg.diversify && static_cast<int>(e.children.size()) == 2 * cfg.beam_size) {
        return diverse_truncate(std::move(e.children), cfg.beam_size);
    }
    return vanilla_truncate(std::move(e.children), cfg.beam_size);
}

double MixturePredictive::point_mean(int dim, bool dominant_only) const {
    if (dominant_only) return comps[static_cast<std::size_t>(dominant)][static_cast<std::size_t>(dim)].mean;
    double m = 0.0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
        m += weights[i] * comps[i][static_cast<std::size_t>(dim)].mean;
    }
    return m;
}

double MixturePredictive::log_lik(int dim, double y) const {
    std::vector<double> terms;
    terms.reserve(weights.size());
    for (std::size_t i = 0; i < weights.size(); ++i) {
        const auto& c = comps[i][static_cast<std::size_t>(dim)];
        const double lw = weights[i] > 0.0 ? std::log(weights[i]) : -std::numeric_limits<double>::infinity();
        terms.push_back(lw + gaussian_log_pdf(y, c.mean, c.var));
    }
    return log_sum_exp(terms);
}

MixturePredictive beam_marginal_predict(const Beam& beam, const Vec& x_star) {
    if (beam.hyps.empty()) throw std::invalid_argument("beam_marginal_predict: empty beam");
    MixturePredictive mp;
    mp.weights.reserve(beam.hyps.size());
    mp.comps.reserve(beam.hyps.size());
    for (const auto& h : beam.hyps) {
        mp.weights.push_back(std::exp(h.log_weight));
        std::vector<PredictiveGaussian> per_dim;
        per_dim.reserve(h.models.size());
        for (const auto& m : h.models) per_dim.push_back(blr_predict(m, x_star));
        mp.comps.push_back(std::move(per_dim));
    }
    mp.dominant = beam.dominant();
    return mp;
}

GreedyState init_greedy(std::vector<BlrModel> base_models, bool record_trace) {
    if (base_models.empty()) throw std::invalid_argument("init_greedy: no models");
    GreedyState s;
    s.models = base_models;
    s.prev_models = std::move(base_models);
    s.record_trace = record_trace;
    return s;
}

void greedy_step(GreedyState& state, const std::vector<StreamBatch>& batch_dims,
                 const SearchConfig& cfg, const std::vector<BlrModel>& base_models) {
    BranchResult keep = score_branch(state.models, batch_dims);
    BranchResult change =
        score_branch(branch_models(state.models, true, cfg, base_models), batch_dims);
    const double m = change_posterior(keep.score, change.score, cfg);

    state.prev_models = std::move(state.models);
    // Hard decision with threshold 1/2; the exact tie goes to "no change".
    state.last_bit = m > 0.5;
    state.models = state.last_bit ? std::move(change.posterior) : std::move(keep.posterior);
    state.last_m = m;
    state.step += 1;
    if (state.record_trace) state.trace.push_back(static_cast<uint8_t>(state.last_bit));
}

namespace {
ShyEmission emission_from(const std::vector<BlrModel>& models, int segment_end) {
    ShyEmission e;
    e.segment_end = segment_end;
    for (const auto& m : models) {
        const Vec& mu = m.weights().mean();
        const Mat& cov = m.weights().cov();
        for (int i = 0; i < m.dim(); ++i) {
            e.mean.push_back(mu[static_cast<std::size_t>(i)]);
            e.stddev.push_back(std::sqrt(cov(i, i)));
        }
    }
    return e;
}
}  // namespace

std::optional<ShyEmission> shy_emit(const GreedyState& state) {
    if (state.step == 0 || !state.last_bit) return std::nullopt;
    // s_t=1 at step t closes the segment that ended at t-1; emit the fit
    // from just before the detected change.
    return emission_from(state.prev_models, state.step - 2);
}

ShyEmission shy_final(const GreedyState& state) {
    return emission_from(state.models, state.step - 1);
}

}  // namespace vbs
