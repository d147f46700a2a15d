#include "vbs/stream.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace vbs {

uint64_t SplitMix64::next_u64() {
    uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

double SplitMix64::next_unit() {
    // (m + 0.5) * 2^-53 with m in [0, 2^53) keeps both endpoints open.
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
}

double SplitMix64::next_normal() { return inverse_normal_cdf(next_unit()); }

uint64_t SplitMix64::next_below(uint64_t n) {
    // Lemire's multiply-shift; bias is unmeasurable at our n and the result
    // is platform-independent.
    return static_cast<uint64_t>((static_cast<__uint128_t>(next_u64()) * n) >> 64);
}

double inverse_normal_cdf(double p) {
    if (!(p > 0.0 && p < 1.0)) {
        throw std::invalid_argument("inverse_normal_cdf: p must lie strictly inside (0,1)");
    }
    // AS241 PPND16 coefficients.
    static const double a[8] = {3.3871328727963666080e0, 1.3314166789178437745e2,
                                1.9715909503065514427e3, 1.3731693765509461125e4,
                                4.5921953931549871457e4, 6.7265770927008700853e4,
                                3.3430575583588128105e4, 2.5090809287301226727e3};
    static const double b[8] = {1.0, 4.2313330701600911252e1, 6.8718700749205790830e2,
                                5.3941960214247511077e3, 2.1213794301586595867e4,
                                3.9307895800092710610e4, 2.8729085735721942674e4,
                                5.2264952788528545610e3};
    static const double c[8] = {1.42343711074968357734e0, 4.63033784615654529590e0,
                                5.76949722146069140550e0, 3.64784832476320460504e0,
                                1.27045825245236838258e0, 2.41780725177450611770e-1,
                                2.27238449892691845833e-2, 7.74545014278341407640e-4};
    static const double d[8] = {1.0, 2.05319162663775882187e0, 1.67638483018380384940e0,
                                6.89767334985100004550e-1, 1.48103976427480074590e-1,
                                1.51986665636164571966e-2, 5.47593808499534494600e-4,
                                1.05075007164441684324e-9};
    static const double e[8] = {6.65790464350110377720e0, 5.46378491116411436990e0,
                                1.78482653991729133580e0, 2.96560571828504891230e-1,
                                2.65321895265761230930e-2, 1.24266094738807843860e-3,
                                2.71155556874348757815e-5, 2.01033439929228813265e-7};
    static const double f[8] = {1.0, 5.99832206555887937690e-1, 1.36929880922735805310e-1,
                                1.48753612908506148525e-2, 7.86869131145613259100e-4,
                                1.84631831751005468180e-5, 1.42151175831644588870e-7,
                                2.04426310338993978564e-15};
    auto poly = [](const double* k, double r) {
        return ((((((k[7] * r + k[6]) * r + k[5]) * r + k[4]) * r + k[3]) * r + k[2]) * r + k[1]) * r +
               k[0];
    };
    const double q = p - 0.5;
    if (std::abs(q) <= 0.425) {
        const double r = 0.180625 - q * q;
        return q * poly(a, r) / poly(b, r);
    }
    double r = q < 0.0 ? p : 1.0 - p;
    r = std::sqrt(-std::log(r));
    double z;
    if (r <= 5.0) {
        r -= 1.6;
        z = poly(c, r) / poly(d, r);
    } else {
        r -= 5.0;
        z = poly(e, r) / poly(f, r);
    }
    return q < 0.0 ? -z : z;
}

double StreamSpec::param(const std::string& key, double fallback) const {
    auto it = params.find(key);
    return it == params.end() ? fallback : it->second;
}

namespace {

StreamBatch one_obs(std::initializer_list<double> features, double target) {
    StreamBatch b;
    b.features = Mat(1, static_cast<int>(features.size()));
    int j = 0;
    for (double v : features) b.features(0, j++) = v;
    b.targets = Vec{target};
    return b;
}

int int_param(const StreamSpec& spec, const std::string& key, double fallback) {
    const double v = spec.param(key, fallback);
    return static_cast<int>(std::llround(v));
}

}  // namespace

StreamData gen_step_mean(const StreamSpec& spec) {
    const int n = int_param(spec, "n", 30);
    const double noise_std = spec.param("noise_std", 0.5);
    const double step = spec.param("step", 1.0);
    const int changes = int_param(spec, "changes", 2);
    const int min_pos = int_param(spec, "min_pos", 5);
    const int max_pos = int_param(spec, "max_pos", 25);
    if (n < 1 || changes < 0 || min_pos < 1 || max_pos >= n || min_pos > max_pos) {
        throw std::invalid_argument("gen_step_mean: inconsistent parameters");
    }
    if (changes > max_pos - min_pos + 1) {
        throw std::invalid_argument("gen_step_mean: more changes than candidate positions");
    }

    // Substream 0 draws the change positions, substream 1 the noise, so the
    // noise sequence does not depend on where the steps land.
    SplitMix64 pos_rng = SplitMix64::substream(spec.seed, 0);
    SplitMix64 noise_rng = SplitMix64::substream(spec.seed, 1);

    std::vector<int> candidates(static_cast<std::size_t>(max_pos - min_pos + 1));
    std::iota(candidates.begin(), candidates.end(), min_pos);
    for (int i = 0; i < changes; ++i) {
        const auto j = i + static_cast<int>(pos_rng.next_below(candidates.size() - static_cast<std::size_t>(i)));
        std::swap(candidates[static_cast<std::size_t>(i)], candidates[static_cast<std::size_t>(j)]);
    }
    std::vector<int> positions(candidates.begin(), candidates.begin() + changes);
    std::sort(positions.begin(), positions.end());

    StreamData out;
    out.feature_dim = 1;
    GroundTruth gt;
    gt.param_names = {"mean"};
    gt.params = Mat(n, 1);
    gt.is_change.assign(static_cast<std::size_t>(n), 0);

    double level = 0.0;
    std::size_t next_change = 0;
    for (int t = 0; t < n; ++t) {
        if (next_change < positions.size() && positions[next_change] == t) {
            level += step;
            gt.is_change[static_cast<std::size_t>(t)] = 1;
            ++next_change;
        }
        gt.params(t, 0) = level;
        out.batches.push_back(one_obs({1.0}, level + noise_std * noise_rng.next_normal()));
    }
    out.truth = std::move(gt);
    return out;
}

StreamData gen_two_lines(const StreamSpec& spec) {
    const int n_per = int_param(spec, "n_per", 20);
    const double noise_std = spec.param("noise_std", 0.1);
    const double slope1 = spec.param("slope1", 0.7);
    const double icpt1 = spec.param("intercept1", -0.5);
    const double slope2 = spec.param("slope2", -0.7);
    const double icpt2 = spec.param("intercept2", 0.5);
    if (n_per < 1) throw std::invalid_argument("gen_two_lines: n_per must be >= 1");

    SplitMix64 x_rng = SplitMix64::substream(spec.seed, 0);
    SplitMix64 noise_rng = SplitMix64::substream(spec.seed, 1);

    const int n = 2 * n_per;
    StreamData out;
    out.feature_dim = 2;
    GroundTruth gt;
    gt.param_names = {"slope", "intercept"};
    gt.params = Mat(n, 2);
    gt.is_change.assign(static_cast<std::size_t>(n), 0);
    gt.is_change[static_cast<std::size_t>(n_per)] = 1;

    for (int t = 0; t < n; ++t) {
        const bool second = t >= n_per;
        const double slope = second ? slope2 : slope1;
        const double icpt = second ? icpt2 : icpt1;
        const double x = -1.0 + 2.0 * x_rng.next_unit();
        const double y = slope * x + icpt + noise_std * noise_rng.next_normal();
        gt.params(t, 0) = slope;
        gt.params(t, 1) = icpt;
        out.batches.push_back(one_obs({x, 1.0}, y));
    }
    out.truth = std::move(gt);
    return out;
}

StreamData gen_piecewise(const StreamSpec& spec) {
    const int dim = int_param(spec, "dim", 8);
    const int segments = int_param(spec, "segments", 5);
    const int seg_len = int_param(spec, "seg_len", 30);
    const double noise_std = spec.param("noise_std", 0.5);
    const double weight_scale = spec.param("weight_scale", 2.0);
    if (dim < 1 || segments < 1 || seg_len < 1) {
        throw std::invalid_argument("gen_piecewise: inconsistent parameters");
    }

    SplitMix64 w_rng = SplitMix64::substream(spec.seed, 0);
    SplitMix64 x_rng = SplitMix64::substream(spec.seed, 1);
    SplitMix64 noise_rng = SplitMix64::substream(spec.seed, 2);

    Mat weights(segments, dim);
    for (int s = 0; s < segments; ++s) {
        for (int j = 0; j < dim; ++j) weights(s, j) = weight_scale * w_rng.next_normal();
    }

    const int n = segments * seg_len;
    StreamData out;
    out.feature_dim = dim;
    GroundTruth gt;
    for (int j = 0; j < dim; ++j) gt.param_names.push_back("w" + std::to_string(j));
    gt.params = Mat(n, dim);
    gt.is_change.assign(static_cast<std::size_t>(n), 0);

    for (int t = 0; t < n; ++t) {
        const int s = t / seg_len;
        if (t > 0 && t % seg_len == 0) gt.is_change[static_cast<std::size_t>(t)] = 1;
        StreamBatch b;
        b.features = Mat(1, dim);
        double y = 0.0;
        for (int j = 0; j < dim; ++j) {
            const double x = x_rng.next_normal();
            b.features(0, j) = x;
            gt.params(t, j) = weights(s, j);
            y += weights(s, j) * x;
        }
        b.targets = Vec{y + noise_std * noise_rng.next_normal()};
        out.batches.push_back(std::move(b));
    }
    out.truth = std::move(gt);
    return out;
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : line) {
        if (ch == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (ch != '\r') {
            cur.push_back(ch);
        }
    }
    out.push_back(cur);
    return out;
}

double parse_cell(const std::string& cell, int line_no, const std::string& col) {
    std::string s = cell;
    // trim spaces
    const auto b = s.find_first_not_of(" \t");
    const auto e = s.find_last_not_of(" \t");
    if (b == std::string::npos) {
        throw std::runtime_error("csv line " + std::to_string(line_no) + ": empty cell in column '" + col + "'");
    }
    s = s.substr(b, e - b + 1);
    double v = 0.0;
    const char* first = s.data();
    const char* last = s.data() + s.size();
    auto [p, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || p != last) {
        throw std::runtime_error("csv line " + std::to_string(line_no) + ": non-numeric cell '" + cell +
                                 "' in column '" + col + "'");
    }
    if (!std::isfinite(v)) {
        throw std::runtime_error("csv line " + std::to_string(line_no) + ": non-finite value in column '" +
                                 col + "'");
    }
    return v;
}

}  // namespace

StreamData load_csv_stream(const std::string& path, const CsvSchema& schema) {
    if (schema.feature_cols.empty()) throw std::invalid_argument("csv schema: no feature columns");
    if (schema.target_cols.empty()) throw std::invalid_argument("csv schema: no target column");
    if (schema.standardize && schema.validation_prefix < 2) {
        throw std::invalid_argument("csv schema: standardization needs a validation prefix of >= 2 rows");
    }
    std::ifstream in(path);
    if (!in) throw std::runtime_error("csv: cannot open " + path);

    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("csv: missing header row in " + path);
    const std::vector<std::string> header = split_csv_line(line);
    auto col_index = [&](const std::string& name) {
        for (std::size_t i = 0; i < header.size(); ++i) {
            if (header[i] == name) return static_cast<int>(i);
        }
        throw std::runtime_error("csv: column '" + name + "' not found in " + path);
    };

    std::vector<int> fidx, tidx;
    for (const auto& c : schema.feature_cols) fidx.push_back(col_index(c));
    for (const auto& c : schema.target_cols) tidx.push_back(col_index(c));

    const int d = static_cast<int>(fidx.size());
    const int m = static_cast<int>(tidx.size());
    std::vector<Vec> feat_rows;
    std::vector<Vec> targ_rows;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const std::vector<std::string> cells = split_csv_line(line);
        if (cells.size() < header.size()) {
            throw std::runtime_error("csv line " + std::to_string(line_no) + ": expected " +
                                     std::to_string(header.size()) + " cells, got " +
                                     std::to_string(cells.size()));
        }
        Vec f(static_cast<std::size_t>(d));
        for (int j = 0; j < d; ++j) {
            f[static_cast<std::size_t>(j)] =
                parse_cell(cells[static_cast<std::size_t>(fidx[static_cast<std::size_t>(j)])], line_no,
                           schema.feature_cols[static_cast<std::size_t>(j)]);
        }
        Vec t(static_cast<std::size_t>(m));
        for (int j = 0; j < m; ++j) {
            t[static_cast<std::size_t>(j)] =
                parse_cell(cells[static_cast<std::size_t>(tidx[static_cast<std::size_t>(j)])], line_no,
                           schema.target_cols[static_cast<std::size_t>(j)]);
            if (schema.prob_target && !(t[static_cast<std::size_t>(j)] >= 0.0 &&
                                        t[static_cast<std::size_t>(j)] <= 1.0)) {
                throw std::runtime_error("csv line " + std::to_string(line_no) +
                                         ": probability target outside [0,1]");
            }
        }
        feat_rows.push_back(std::move(f));
        targ_rows.push_back(std::move(t));
    }
    if (feat_rows.empty()) throw std::runtime_error("csv: no data rows in " + path);

    // Feature scaling from the declared validation prefix, applied everywhere.
    if (schema.standardize) {
        const int prefix = std::min<int>(schema.validation_prefix, static_cast<int>(feat_rows.size()));
        if (prefix < 2) throw std::runtime_error("csv: validation prefix shorter than 2 rows");
        Vec mean(static_cast<std::size_t>(d), 0.0), sd(static_cast<std::size_t>(d), 0.0);
        for (int i = 0; i < prefix; ++i) axpy(1.0, feat_rows[static_cast<std::size_t>(i)], mean);
        kernels::scale(1.0 / prefix, mean.data(), mean.size());
        for (int i = 0; i < prefix; ++i) {
            for (int j = 0; j < d; ++j) {
                const double dev = feat_rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] -
                                   mean[static_cast<std::size_t>(j)];
                sd[static_cast<std::size_t>(j)] += dev * dev;
            }
        }
        for (int j = 0; j < d; ++j) {
            double s = std::sqrt(sd[static_cast<std::size_t>(j)] / (prefix - 1));
            if (s < 1e-300) s = 1.0;  // constant feature: center only
            sd[static_cast<std::size_t>(j)] = s;
        }
        for (auto& row : feat_rows) {
            for (int j = 0; j < d; ++j) {
                row[static_cast<std::size_t>(j)] =
                    (row[static_cast<std::size_t>(j)] - mean[static_cast<std::size_t>(j)]) /
                    sd[static_cast<std::size_t>(j)];
            }
        }
    }

    StreamData out;
    out.feature_dim = d;
    out.target_dims = m;
    if (m > 1) out.extra_target_dims.resize(static_cast<std::size_t>(m - 1));
    for (std::size_t i = 0; i < feat_rows.size(); ++i) {
        StreamBatch b;
        b.features = Mat(1, d);
        for (int j = 0; j < d; ++j) b.features(0, j) = feat_rows[i][static_cast<std::size_t>(j)];
        const double t0 = targ_rows[i][0];
        if (schema.prob_target) {
            b.targets = Vec{logodds_encode(t0, schema.lo_fill, schema.hi_fill)};
            b.raw_probs = Vec{t0};
        } else {
            b.targets = Vec{t0};
        }
        for (int k = 1; k < m; ++k) {
            StreamBatch bk;
            bk.features = b.features;
            const double tk = targ_rows[i][static_cast<std::size_t>(k)];
            if (schema.prob_target) {
                bk.targets = Vec{logodds_encode(tk, schema.lo_fill, schema.hi_fill)};
                bk.raw_probs = Vec{tk};
            } else {
                bk.targets = Vec{tk};
            }
            out.extra_target_dims[static_cast<std::size_t>(k - 1)].push_back(std::move(bk));
        }
        out.batches.push_back(std::move(b));
    }
    return out;
}

StreamData make_stream(const StreamSpec& spec) {
    switch (spec.kind) {
        case StreamKind::StepMean: return gen_step_mean(spec);
        case StreamKind::TwoLines: return gen_two_lines(spec);
        case StreamKind::PiecewiseCustom: return gen_piecewise(spec);
        case StreamKind::CsvFile: return load_csv_stream(spec.csv_path, spec.schema);
    }
    throw std::logic_error("make_stream: unreachable");
}

StreamKind stream_kind_from_name(const std::string& name) {
    if (name == "step_mean") return StreamKind::StepMean;
    if (name == "two_lines") return StreamKind::TwoLines;
    if (name == "piecewise") return StreamKind::PiecewiseCustom;
    if (name == "csv") return StreamKind::CsvFile;
    throw std::invalid_argument("unknown stream kind: " + name);
}

const char* stream_kind_name(StreamKind k) {
    switch (k) {
        case StreamKind::StepMean: return "step_mean";
        case StreamKind::TwoLines: return "two_lines";
        case StreamKind::PiecewiseCustom: return "piecewise";
        case StreamKind::CsvFile: return "csv";
    }
    return "step_mean";
}

}  // namespace vbs
