#pragma once

// Deterministic stream generation and CSV ingestion. All randomness flows
// through SplitMix64 substreams with inverse-CDF normal sampling, so a
// (spec, seed) pair replays byte-identically on any platform.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "vbs/blr.hpp"

namespace vbs {

// SplitMix64 (Steele, Lea & Flood). Substream k of seed s starts from state
// s + k * 0x9e3779b97f4a7c15, i.e. k steps of the underlying Weyl sequence.
class SplitMix64 {
public:
    explicit SplitMix64(uint64_t seed) : state_(seed) {}
    static SplitMix64 substream(uint64_t seed, uint64_t k) {
        return SplitMix64(seed + k * 0x9e3779b97f4a7c15ULL);
    }

    uint64_t next_u64();
    // uniform on the open interval (0,1), 53-bit resolution
    double next_unit();
    // standard normal via the AS241 inverse CDF
    double next_normal();
    // uniform integer in [0, n)
    uint64_t next_below(uint64_t n);

private:
    uint64_t state_;
};

// Wichura's AS241 double-precision inverse normal CDF.
double inverse_normal_cdf(double p);

enum class StreamKind { StepMean, TwoLines, PiecewiseCustom, CsvFile };

struct CsvSchema {
    std::vector<std::string> feature_cols;
    std::vector<std::string> target_cols;  // one per target dimension
    bool prob_target = false;
    double lo_fill = -4.0;
    double hi_fill = 4.0;
    bool standardize = false;
    int validation_prefix = 0;  // rows supplying the standardization statistics
};

struct StreamSpec {
    StreamKind kind = StreamKind::StepMean;
    uint64_t seed = 0;
    std::map<std::string, double> params;  // generator-specific knobs
    std::string csv_path;
    CsvSchema schema;

    double param(const std::string& key, double fallback) const;
};

struct GroundTruth {
    std::vector<std::string> param_names;
    Mat params;                      // steps x n_params, active true parameters
    std::vector<uint8_t> is_change;  // 1 where a new segment starts
};

struct StreamData {
    std::vector<StreamBatch> batches;         // scalar-target steps, size-1 batches
    std::vector<std::vector<StreamBatch>> extra_target_dims;  // per extra dim, same features
    std::optional<GroundTruth> truth;
    int feature_dim = 0;
    int target_dims = 1;
};

// Piecewise-constant latent mean: level starts at 0 and rises by `step` at
// each of `changes` positions drawn uniformly without replacement from
// [min_pos, max_pos]. Observations are level + noise_std * z with constant
// feature 1. Defaults follow the 30-point toy setup.
StreamData gen_step_mean(const StreamSpec& spec);

// Two-segment linear stream: x ~ Unif(-1,1), y ~ N(f(x), noise_std^2) with
// features [x, 1]; f switches from 0.7x-0.5 to -0.7x+0.5 after the first
// n_per points.
StreamData gen_two_lines(const StreamSpec& spec);

// Piecewise linear regression: `segments` blocks of `seg_len` steps, each
// with its own weight vector (scale * standard normal), x ~ N(0, I_d).
StreamData gen_piecewise(const StreamSpec& spec);

StreamData load_csv_stream(const std::string& path, const CsvSchema& schema);

StreamData make_stream(const StreamSpec& spec);

StreamKind stream_kind_from_name(const std::string& name);
const char* stream_kind_name(StreamKind k);

}  // namespace vbs
