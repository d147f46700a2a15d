#include "vbs/runner.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <memory>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace vbs {

namespace {

struct StepPrediction {
    double point = 0.0;     // model-space mean
    double log_lik = 0.0;   // log density of the encoded target
    bool log_lik_valid = true;
};

class OnlineLearner {
public:
    virtual ~OnlineLearner() = default;
    virtual StepPrediction predict(const Vec& x, double y_encoded) = 0;
    virtual void observe(const StreamBatch& batch) = 0;
    virtual std::optional<int> dominant_bit() const { return std::nullopt; }
    virtual std::optional<double> hyp_entropy() const { return std::nullopt; }
    virtual const Beam* beam() const { return nullptr; }
    virtual const std::vector<ShyEmission>* emissions() const { return nullptr; }
};

class VclLearner : public OnlineLearner {
public:
    explicit VclLearner(BlrModel model) : model_(std::move(model)) {}
    StepPrediction predict(const Vec& x, double y) override {
        const PredictiveGaussian p = blr_predict(model_, x);
        return {p.mean, gaussian_log_pdf(y, p.mean, p.var), true};
    }
    void observe(const StreamBatch& b) override { model_ = vcl_step(model_, b); }

protected:
    BlrModel model_;
};

// Same recursion and mode as VCL; the probability metric is not applicable.
class LpLearner : public VclLearner {
public:
    explicit LpLearner(BlrModel model) : VclLearner(std::move(model)) {}
    StepPrediction predict(const Vec& x, double) override {
        return {lp_predict(model_, x), 0.0, false};
    }
};

class IndependentLearner : public OnlineLearner {
public:
    explicit IndependentLearner(BlrModel base) : base_(base), current_(std::move(base)) {}
    StepPrediction predict(const Vec& x, double y) override {
        const PredictiveGaussian p = blr_predict(current_, x);
        return {p.mean, gaussian_log_pdf(y, p.mean, p.var), true};
    }
    void observe(const StreamBatch& b) override { current_ = independent_step(base_, b); }

private:
    BlrModel base_;
    BlrModel current_;
};

class BfLearner : public OnlineLearner {
public:
    BfLearner(BlrModel base, double beta)
        : cfg_{beta, base.weights()}, current_(std::move(base)) {}
    StepPrediction predict(const Vec& x, double y) override {
        const PredictiveGaussian p = blr_predict(current_, x);
        return {p.mean, gaussian_log_pdf(y, p.mean, p.var), true};
    }
    void observe(const StreamBatch& b) override { current_ = bf_step(current_, cfg_, b); }

private:
    BfConfig cfg_;
    BlrModel current_;
};

class BocdLearner : public OnlineLearner {
public:
    BocdLearner(BlrModel base, BocdConfig cfg, bool predict_dominant)
        : cfg_(cfg), base_{std::move(base)}, state_(BocdState::init({base_})),
          predict_dominant_(predict_dominant) {}
    StepPrediction predict(const Vec& x, double y) override {
        const MixturePredictive mp = bocd_predict(state_, x);
        const double point = mp.point_mean(0, predict_dominant_);
        const double ll = predict_dominant_
                              ? gaussian_log_pdf(y, mp.comps[0][0].mean, mp.comps[0][0].var)
                              : mp.log_lik(0, y);
        return {point, ll, true};
    }
    void observe(const StreamBatch& b) override {
        state_ = bocd_step(state_, {b}, cfg_, {base_});
        stepped_ = true;
    }
    std::optional<int> dominant_bit() const override {
        if (!stepped_) return std::nullopt;
        return state_.map_run_length() < cfg_.change_run_threshold ? 1 : 0;
    }
    std::optional<double> hyp_entropy() const override { return state_.entropy(); }

private:
    BocdConfig cfg_;
    BlrModel base_;
    BocdState state_;
    bool predict_dominant_;
    bool stepped_ = false;
};

class VbsLearner : public OnlineLearner {
public:
    VbsLearner(BlrModel base, SearchConfig cfg, bool predict_dominant)
        : cfg_(cfg), base_{std::move(base)},
          beam_(init_beam({base_}, cfg.record_traces)), predict_dominant_(predict_dominant) {}
    StepPrediction predict(const Vec& x, double y) override {
        const MixturePredictive mp = beam_marginal_predict(beam_, x);
        const double point = mp.point_mean(0, predict_dominant_);
        const double ll = predict_dominant_
                              ? gaussian_log_pdf(y, mp.comps[0][0].mean, mp.comps[0][0].var)
                              : mp.log_lik(0, y);
        return {point, ll, true};
    }
    void observe(const StreamBatch& b) override {
        beam_ = beam_step(beam_, {b}, cfg_, {base_});
        stepped_ = true;
    }
    std::optional<int> dominant_bit() const override {
        if (!stepped_) return std::nullopt;
        return beam_.hyps[static_cast<std::size_t>(beam_.dominant())].last_bit ? 1 : 0;
    }
    std::optional<double> hyp_entropy() const override { return beam_.entropy(); }
    const Beam* beam() const override { return &beam_; }

private:
    SearchConfig cfg_;
    BlrModel base_;
    Beam beam_;
    bool predict_dominant_;
    bool stepped_ = false;
};

class GreedyLearner : public OnlineLearner {
public:
    GreedyLearner(BlrModel base, SearchConfig cfg, bool shy)
        : cfg_(cfg), base_{std::move(base)},
          state_(init_greedy({base_}, cfg.record_traces)), shy_(shy) {}
    StepPrediction predict(const Vec& x, double y) override {
        const PredictiveGaussian p = blr_predict(state_.models[0], x);
        return {p.mean, gaussian_log_pdf(y, p.mean, p.var), true};
    }
    void observe(const StreamBatch& b) override {
        greedy_step(state_, {b}, cfg_, {base_});
        if (shy_) {
            if (auto e = shy_emit(state_)) emissions_.push_back(std::move(*e));
        }
    }
    std::optional<int> dominant_bit() const override {
        if (state_.step == 0) return std::nullopt;
        return state_.last_bit ? 1 : 0;
    }
    // single-hypothesis weight distribution, same as a K=1 beam
    std::optional<double> hyp_entropy() const override { return 0.0; }
    const std::vector<ShyEmission>* emissions() const override { return shy_ ? &emissions_ : nullptr; }
    void finish() {
        if (shy_) emissions_.push_back(shy_final(state_));
    }

private:
    SearchConfig cfg_;
    BlrModel base_;
    GreedyState state_;
    bool shy_;
    std::vector<ShyEmission> emissions_;
};

std::unique_ptr<OnlineLearner> make_learner(const RunConfig& cfg, int dim) {
    BlrModel base(GaussianNat::isotropic(dim, cfg.prior_scale * cfg.prior_scale), cfg.sigma_n2);
    switch (cfg.method) {
        case Method::Vbs:
            return std::make_unique<VbsLearner>(std::move(base), cfg.search, cfg.predict_dominant);
        case Method::Vgs:
            return std::make_unique<GreedyLearner>(std::move(base), cfg.search, false);
        case Method::ShyVgs:
            return std::make_unique<GreedyLearner>(std::move(base), cfg.search, true);
        case Method::Bocd:
            return std::make_unique<BocdLearner>(std::move(base), cfg.bocd, cfg.predict_dominant);
        case Method::Bf:
            return std::make_unique<BfLearner>(std::move(base), cfg.bf_beta);
        case Method::Vcl:
            return std::make_unique<VclLearner>(std::move(base));
        case Method::Lp:
            return std::make_unique<LpLearner>(std::move(base));
        case Method::Independent:
            return std::make_unique<IndependentLearner>(std::move(base));
    }
    throw std::logic_error("make_learner: unreachable");
}

std::string json_escape(const std::string& s) {
    std::string out;
    out.reserve(s.size() + 2);
    for (char c : s) {
        switch (c) {
            case '"': out += "\\\""; break;
            case '\\': out += "\\\\"; break;
            case '\n': out += "\\n"; break;
            case '\t': out += "\\t"; break;
            default: out.push_back(c);
        }
    }
    return out;
}

}  // namespace

std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string effective_out_dir(const RunConfig& cfg) {
    const char* env = std::getenv("VBS_OUTPUT_DIR");
    if (env != nullptr && env[0] != '\0') return env;
    return cfg.out_dir;
}

RunResult run_experiment(const RunConfig& cfg, bool write_files, std::vector<StepRecord>* capture) {
    cfg.validate();
    const auto t0 = std::chrono::steady_clock::now();

    StreamData stream = make_stream(cfg.stream);
    if (stream.target_dims != 1) {
        throw std::invalid_argument(
            "run: the metrics writer is scalar-target; drive vector-target regression through the "
            "library API (multi_target_update)");
    }
    const bool prob_space = !stream.batches.empty() && stream.batches.front().raw_probs.has_value();

    auto learner = make_learner(cfg, stream.feature_dim);

    const std::string dir = effective_out_dir(cfg);
    std::ofstream metrics;
    if (write_files) {
        std::filesystem::create_directories(dir);
        metrics.open(dir + "/" + cfg.metrics_file, std::ios::trunc);
        if (!metrics) throw std::runtime_error("run: cannot open metrics file in " + dir);
        metrics << "step,prediction,truth,abs_error,mcae,log_lik,dominant_s,beam_entropy\n";
    }

    RunningMean mcae_acc;
    RunningMean ll_acc;
    bool ll_all = true;

    for (std::size_t t = 0; t < stream.batches.size(); ++t) {
        const StreamBatch& batch = stream.batches[t];
        StepRecord rec;
        rec.step = static_cast<int>(t);
        try {
            double err_sum = 0.0;
            double ll_sum = 0.0;
            bool ll_valid = true;
            Vec x(static_cast<std::size_t>(batch.dim()));
            for (int r = 0; r < batch.rows(); ++r) {
                for (int j = 0; j < batch.dim(); ++j) x[static_cast<std::size_t>(j)] = batch.features(r, j);
                const double y_enc = batch.targets[static_cast<std::size_t>(r)];
                const StepPrediction p = learner->predict(x, y_enc);
                double point = p.point;
                double truth = y_enc;
                if (prob_space) {
                    point = sigmoid(point);  // median of the logistic-normal predictive
                    truth = (*batch.raw_probs)[static_cast<std::size_t>(r)];
                }
                if (r == 0) {
                    rec.prediction = point;
                    rec.truth = truth;
                }
                err_sum += std::abs(point - truth);
                ll_valid = ll_valid && p.log_lik_valid;
                ll_sum += p.log_lik;
            }
            rec.abs_error = err_sum / batch.rows();
            if (ll_valid) rec.log_lik = ll_sum / batch.rows();

            learner->observe(batch);
        } catch (const std::exception& e) {
            throw std::runtime_error("run: numeric failure at step " + std::to_string(t) + ": " + e.what());
        }
        rec.dominant_bit = learner->dominant_bit();
        rec.beam_entropy = learner->hyp_entropy();

        mcae_acc.add(rec.abs_error);
        if (rec.log_lik) {
            ll_acc.add(*rec.log_lik);
        } else {
            ll_all = false;
        }

        if (write_files) {
            metrics << rec.step << ',' << fmt17(rec.prediction) << ',' << fmt17(rec.truth) << ','
                    << fmt17(rec.abs_error) << ',' << fmt17(mcae_acc.mean()) << ',';
            if (rec.log_lik) metrics << fmt17(*rec.log_lik);
            metrics << ',';
            if (rec.dominant_bit) metrics << *rec.dominant_bit;
            metrics << ',';
            if (rec.beam_entropy) metrics << fmt17(*rec.beam_entropy);
            metrics << '\n';
            metrics.flush();  // metrics stream to disk per step
        }
        if (capture != nullptr) capture->push_back(rec);
    }
    if (mcae_acc.count() == 0) throw std::runtime_error("run: empty stream");

    if (auto* greedy = dynamic_cast<GreedyLearner*>(learner.get())) greedy->finish();

    RunResult res;
    res.final_mcae = mcae_acc.mean();
    if (ll_all && ll_acc.count() > 0) res.mean_predictive_ll = ll_acc.mean();
    res.steps = static_cast<int>(stream.batches.size());
    res.wall_sec = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    if (write_files) {
        if (!cfg.trace_file.empty()) {
            const Beam* beam = learner->beam();
            std::ofstream tr(dir + "/" + cfg.trace_file, std::ios::trunc);
            if (!tr) throw std::runtime_error("run: cannot open trace file");
            tr << "trace,weight\n";
            if (beam != nullptr) {
                for (const auto& h : beam->hyps) {
                    for (uint8_t b : h.trace) tr << (b ? '1' : '0');
                    tr << ',' << fmt17(std::exp(h.log_weight)) << '\n';
                }
            }
        }
        if (!cfg.segments_file.empty()) {
            if (const auto* ems = learner->emissions()) {
                std::ofstream seg(dir + "/" + cfg.segments_file, std::ios::trunc);
                if (!seg) throw std::runtime_error("run: cannot open segments file");
                const std::size_t p = ems->empty() ? 0 : ems->front().mean.size();
                seg << "segment_end";
                for (std::size_t j = 0; j < p; ++j) seg << ",mean_" << j;
                for (std::size_t j = 0; j < p; ++j) seg << ",std_" << j;
                seg << '\n';
                for (const auto& e : *ems) {
                    seg << e.segment_end;
                    for (double v : e.mean) seg << ',' << fmt17(v);
                    for (double v : e.stddev) seg << ',' << fmt17(v);
                    seg << '\n';
                }
            }
        }
        // Run summary. Wall time goes to the console, not into the file, so
        // that identical config+seed reruns are byte-identical.
        std::ofstream sum(dir + "/" + cfg.summary_file, std::ios::trunc);
        if (!sum) throw std::runtime_error("run: cannot open summary file");
        sum << "{\n";
        sum << "  \"method\": \"" << method_name(cfg.method) << "\",\n";
        sum << "  \"stream\": \"" << stream_kind_name(cfg.stream.kind) << "\",\n";
        sum << "  \"steps\": " << res.steps << ",\n";
        sum << "  \"final_mcae\": " << fmt17(res.final_mcae) << ",\n";
        sum << "  \"mean_predictive_ll\": "
            << (res.mean_predictive_ll ? fmt17(*res.mean_predictive_ll) : std::string("null")) << ",\n";
        sum << "  \"kernel_backend\": \"" << kernels::backend_name(kernels::active_backend()) << "\",\n";
        sum << "  \"config\": {";
        bool first = true;
        for (const auto& [k, v] : cfg.echo) {
            sum << (first ? "\n" : ",\n") << "    \"" << json_escape(k) << "\": \"" << json_escape(v) << "\"";
            first = false;
        }
        sum << "\n  }\n}\n";
    }
    return res;
}

std::vector<SweepAxis> parse_grid(const std::string& grid) {
    std::vector<SweepAxis> axes;
    std::stringstream ss(grid);
    std::string part;
    while (std::getline(ss, part, ';')) {
        if (part.empty()) continue;
        const auto eq = part.find('=');
        if (eq == std::string::npos || eq == 0) {
            throw std::invalid_argument("grid axis must have the form key=v1,v2,...: " + part);
        }
        SweepAxis axis;
        axis.key = part.substr(0, eq);
        axis.values = split_list(part.substr(eq + 1));
        if (axis.values.empty()) throw std::invalid_argument("grid axis has no values: " + part);
        axes.push_back(std::move(axis));
    }
    if (axes.empty()) throw std::invalid_argument("empty sweep grid");
    return axes;
}

std::vector<SweepRow> sweep(const KvMap& base, const std::vector<SweepAxis>& axes, int jobs,
                            const std::string& sweep_dir, bool write_files) {
    std::size_t total = 1;
    for (const auto& a : axes) total *= a.values.size();

    std::vector<SweepRow> rows(total);
    auto run_point = [&](std::size_t idx) {
        SweepRow& row = rows[idx];
        row.index = static_cast<int>(idx);
        // odometer decode, last axis fastest
        std::size_t rem = idx;
        for (std::size_t a = axes.size(); a-- > 0;) {
            const std::size_t n = axes[a].values.size();
            row.overrides[axes[a].key] = axes[a].values[rem % n];
            rem /= n;
        }
        try {
            KvMap merged = base;
            for (const auto& [k, v] : row.overrides) merged[k] = v;
            merged["output.dir"] = sweep_dir + "/point_" + std::to_string(idx);
            RunConfig cfg = RunConfig::from_kv(merged);
            const RunResult r = run_experiment(cfg, write_files);
            row.ok = true;
            row.final_mcae = r.final_mcae;
            row.mean_predictive_ll = r.mean_predictive_ll;
        } catch (const std::exception& e) {
            row.ok = false;
            row.error = e.what();
        }
    };

    if (jobs <= 1) {
        for (std::size_t i = 0; i < total; ++i) run_point(i);
    } else {
        std::atomic<std::size_t> next{0};
        auto worker = [&] {
            for (;;) {
                const std::size_t i = next.fetch_add(1);
                if (i >= total) return;
                run_point(i);
            }
        };
        std::vector<std::thread> pool;
        const int n = std::min<int>(jobs, static_cast<int>(total));
        pool.reserve(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    return rows;
}

void write_sweep_summary(const std::string& path, const std::vector<SweepAxis>& axes,
                         const std::vector<SweepRow>& rows) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw std::runtime_error("sweep: cannot open summary " + path);
    out << "index";
    for (const auto& a : axes) out << ',' << a.key;
    out << ",status,final_mcae,mean_predictive_ll,error\n";
    for (const auto& r : rows) {
        out << r.index;
        for (const auto& a : axes) out << ',' << r.overrides.at(a.key);
        out << ',' << (r.ok ? "ok" : "failed") << ',';
        if (r.ok) out << fmt17(r.final_mcae);
        out << ',';
        if (r.ok && r.mean_predictive_ll) out << fmt17(*r.mean_predictive_ll);
        out << ",\"";
        for (char c : r.error) {
            if (c == '"') out << "\"\"";
            else out << c;
        }
        out << "\"\n";
    }
}

namespace {

// Small deterministic helpers for the selftest suite.
Mat selftest_spd(SplitMix64& rng, int d) {
    Mat m(d, d);
    for (int i = 0; i < d; ++i) {
        for (int j = 0; j < d; ++j) m(i, j) = rng.next_normal();
    }
    Mat spd(d, d);
    for (int i = 0; i < d; ++i) {
        for (int j = 0; j < d; ++j) {
            double s = 0.0;
            for (int k = 0; k < d; ++k) s += m(k, i) * m(k, j);
            spd(i, j) = s + (i == j ? 0.5 * d : 0.0);
        }
    }
    return spd;
}

bool selftest_check(std::ostream& out, const char* name, bool ok) {
    out << (ok ? "[ok]   " : "[FAIL] ") << name << '\n';
    return ok;
}

}  // namespace

int selftest(std::ostream& out) {
    int failures = 0;
    SplitMix64 rng(20240901u);

    out << "kernel backend: " << kernels::backend_name(kernels::active_backend()) << '\n';

    {  // active backend agrees with the scalar reference
        const std::size_t n = 257;
        Vec a(n), b(n);
        for (auto& v : a) v = rng.next_normal();
        for (auto& v : b) v = rng.next_normal();
        const double d_active = kernels::dot(a.data(), b.data(), n);
        const double d_scalar = kernels::scalar_ops().dot(a.data(), b.data(), n);
        Vec y1(b), y2(b);
        kernels::axpy(0.7, a.data(), y1.data(), n);
        kernels::scalar_ops().axpy(0.7, a.data(), y2.data(), n);
        bool ok = std::abs(d_active - d_scalar) < 1e-9 && max_abs_diff(y1, y2) < 1e-12;
        if (!selftest_check(out, "kernels: simd/scalar equivalence", ok)) ++failures;
    }
    {  // Cholesky solve multiplies back
        const Mat a = selftest_spd(rng, 8);
        Vec x(8);
        for (auto& v : x) v = rng.next_normal();
        const Vec b = matvec(a, x);
        const Vec xs = Cholesky(a).solve(b);
        if (!selftest_check(out, "dense: cholesky solve", max_abs_diff(x, xs) < 1e-8)) ++failures;
    }
    {  // tempering: mean invariant, entropy shift -d/2 log beta
        GaussianNat g(selftest_spd(rng, 4), Vec{0.3, -0.2, 1.0, 0.5});
        const GaussianNat t = temper(g, 0.25);
        const bool ok = max_abs_diff(g.mean(), t.mean()) < 1e-10 &&
                        std::abs((t.entropy() - g.entropy()) - (-0.5 * 4 * std::log(0.25))) < 1e-10;
        if (!selftest_check(out, "gauss: temper mean/entropy identities", ok)) ++failures;
    }
    {  // streamed conjugate update equals batch natural-parameter sums
        const int d = 5, n = 12;
        BlrModel m(GaussianNat::isotropic(d, 1.0), 0.7);
        StreamBatch batch;
        batch.features = Mat(n, d);
        batch.targets.resize(n);
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < d; ++j) batch.features(i, j) = rng.next_normal();
            batch.targets[static_cast<std::size_t>(i)] = rng.next_normal();
        }
        const BlrModel post = blr_update(m, batch);
        Mat prec = m.weights().precision();
        Vec eta = m.weights().linear();
        for (int i = 0; i < n; ++i) {
            Vec x(static_cast<std::size_t>(d));
            for (int j = 0; j < d; ++j) x[static_cast<std::size_t>(j)] = batch.features(i, j);
            add_rank1(prec, x, x, 1.0 / 0.7);
            axpy(batch.targets[static_cast<std::size_t>(i)] / 0.7, x, eta);
        }
        const bool ok = max_abs_diff(post.weights().precision(), prec) < 1e-10 &&
                        max_abs_diff(post.weights().linear(), eta) < 1e-10;
        if (!selftest_check(out, "blr: streamed = batch conjugate posterior", ok)) ++failures;
    }
    {  // CELBO at the exact posterior equals the evidence
        const int d = 3;
        BlrModel m(GaussianNat::isotropic(d, 2.0), 0.5);
        StreamBatch batch;
        batch.features = Mat(4, d);
        batch.targets.resize(4);
        for (int i = 0; i < 4; ++i) {
            for (int j = 0; j < d; ++j) batch.features(i, j) = rng.next_normal();
            batch.targets[static_cast<std::size_t>(i)] = rng.next_normal();
        }
        const ScoredUpdate u = blr_update_scored(m, batch);
        const double c = celbo(u.model.weights(), m.weights(), 0.5, batch);
        if (!selftest_check(out, "blr: celbo identity at exact posterior",
                            std::abs(c - u.log_evidence) < 1e-8)) {
            ++failures;
        }
    }
    {  // beam weights stay normalized and traces have K*t bits
        SearchConfig cfg;
        cfg.beam_size = 4;
        cfg.record_traces = true;
        cfg.broaden.beta = 0.5;
        StreamSpec spec;
        spec.kind = StreamKind::StepMean;
        spec.seed = 3;
        const StreamData sd = gen_step_mean(spec);
        BlrModel base(GaussianNat::isotropic(1, 1.0), 0.25);
        Beam beam = init_beam({base}, true);
        bool ok = true;
        for (std::size_t t = 0; t < 10; ++t) {
            beam = beam_step(beam, {sd.batches[t]}, cfg, {base});
            double mass = 0.0;
            std::size_t bits = 0;
            for (const auto& h : beam.hyps) {
                mass += std::exp(h.log_weight);
                bits += h.trace.size();
            }
            ok = ok && std::abs(mass - 1.0) < 1e-10 && bits == beam.hyps.size() * (t + 1);
        }
        if (!selftest_check(out, "search: beam normalization and trace storage", ok)) ++failures;
    }
    {  // BOCD run-length mass sums to one
        BlrModel base(GaussianNat::isotropic(1, 1.0), 0.25);
        BocdConfig bc;
        bc.hazard = 0.2;
        bc.max_kept = 5;
        BocdState st = BocdState::init({base});
        StreamSpec spec;
        spec.kind = StreamKind::StepMean;
        spec.seed = 4;
        const StreamData sd = gen_step_mean(spec);
        bool ok = true;
        for (std::size_t t = 0; t < 12; ++t) {
            st = bocd_step(st, {sd.batches[t]}, bc, {base});
            double mass = 0.0;
            for (const auto& r : st.runs) mass += std::exp(r.log_prob);
            ok = ok && std::abs(mass - 1.0) < 1e-10 && static_cast<int>(st.runs.size()) <= bc.max_kept;
        }
        if (!selftest_check(out, "bocd: run-length posterior normalized", ok)) ++failures;
    }
    {  // generator determinism
        StreamSpec spec;
        spec.kind = StreamKind::TwoLines;
        spec.seed = 7;
        const StreamData a = gen_two_lines(spec);
        const StreamData b = gen_two_lines(spec);
        bool ok = a.batches.size() == b.batches.size();
        for (std::size_t i = 0; ok && i < a.batches.size(); ++i) {
            ok = a.batches[i].targets == b.batches[i].targets &&
                 max_abs_diff(a.batches[i].features, b.batches[i].features) == 0.0;
        }
        if (!selftest_check(out, "data: byte-identical replay", ok)) ++failures;
    }

    out << (failures == 0 ? "selftest: all checks passed\n"
                          : "selftest: " + std::to_string(failures) + " check(s) failed\n");
    return failures;
}

void simulate_to_files(const StreamSpec& spec, const std::string& dir,
                       const std::string& stream_file, const std::string& truth_file) {
    StreamData data = make_stream(spec);
    std::filesystem::create_directories(dir);

    std::ofstream s(dir + "/" + stream_file, std::ios::trunc);
    if (!s) throw std::runtime_error("simulate: cannot open " + dir + "/" + stream_file);
    const int d = data.feature_dim;
    const bool probs = !data.batches.empty() && data.batches.front().raw_probs.has_value();
    s << "step";
    for (int j = 0; j < d; ++j) s << ",x" << j;
    s << ",y";
    if (probs) s << ",raw_prob";
    s << '\n';
    for (std::size_t t = 0; t < data.batches.size(); ++t) {
        const StreamBatch& b = data.batches[t];
        for (int r = 0; r < b.rows(); ++r) {
            s << t;
            for (int j = 0; j < d; ++j) s << ',' << fmt17(b.features(r, j));
            s << ',' << fmt17(b.targets[static_cast<std::size_t>(r)]);
            if (probs) s << ',' << fmt17((*b.raw_probs)[static_cast<std::size_t>(r)]);
            s << '\n';
        }
    }

    if (data.truth) {
        std::ofstream tr(dir + "/" + truth_file, std::ios::trunc);
        if (!tr) throw std::runtime_error("simulate: cannot open " + dir + "/" + truth_file);
        tr << "step";
        for (const auto& name : data.truth->param_names) tr << ',' << name;
        tr << ",is_change\n";
        for (int t = 0; t < data.truth->params.rows(); ++t) {
            tr << t;
            for (int j = 0; j < data.truth->params.cols(); ++j) tr << ',' << fmt17(data.truth->params(t, j));
            tr << ',' << static_cast<int>(data.truth->is_change[static_cast<std::size_t>(t)]) << '\n';
        }
    }
}

}  // namespace vbs
