#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>

#include "test_support.hpp"
#include "vbs/stream.hpp"

using namespace vbs;

namespace {

// Standard normal CDF via erfc, as an independent check of the inverse.
double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

struct TempCsv {
    std::string path;
    explicit TempCsv(const std::string& content) {
        path = std::string("stream_fixture_") + std::to_string(counter()++) + ".csv";
        std::ofstream f(path, std::ios::trunc);
        f << content;
    }
    ~TempCsv() { std::remove(path.c_str()); }
    static int& counter() {
        static int c = 0;
        return c;
    }
};

double ols_slope_intercept(const StreamData& sd, int from, int to, bool want_slope) {
    // two-parameter least squares on features [x, 1], solved by hand
    double sxx = 0, sx1 = 0, s11 = 0, sxy = 0, s1y = 0;
    for (int t = from; t < to; ++t) {
        const double x = sd.batches[static_cast<std::size_t>(t)].features(0, 0);
        const double y = sd.batches[static_cast<std::size_t>(t)].targets[0];
        sxx += x * x;
        sx1 += x;
        s11 += 1.0;
        sxy += x * y;
        s1y += y;
    }
    const double det = sxx * s11 - sx1 * sx1;
    const double slope = (sxy * s11 - sx1 * s1y) / det;
    const double icpt = (sxx * s1y - sx1 * sxy) / det;
    return want_slope ? slope : icpt;
}

}  // namespace

TEST_CASE("inverse normal cdf hits published quantiles and inverts the cdf") {
    CHECK(inverse_normal_cdf(0.5) == 0.0);
    CHECK(inverse_normal_cdf(0.975) == doctest::Approx(1.959963984540054).epsilon(1e-12));
    CHECK(inverse_normal_cdf(0.01) == doctest::Approx(-2.3263478740408408).epsilon(1e-12));
    for (double p : {1e-10, 1e-4, 0.2, 0.5, 0.7, 0.9999, 1 - 1e-12}) {
        CHECK(normal_cdf(inverse_normal_cdf(p)) == doctest::Approx(p).epsilon(1e-9));
    }
    CHECK_THROWS_AS(inverse_normal_cdf(0.0), std::invalid_argument);
    CHECK_THROWS_AS(inverse_normal_cdf(1.0), std::invalid_argument);
}

TEST_CASE("splitmix substreams are deterministic and decoupled") {
    SplitMix64 a = SplitMix64::substream(42, 0);
    SplitMix64 b = SplitMix64::substream(42, 0);
    for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());

    SplitMix64 c = SplitMix64::substream(42, 1);
    bool differs = false;
    SplitMix64 a2 = SplitMix64::substream(42, 0);
    for (int i = 0; i < 10; ++i) differs = differs || (a2.next_u64() != c.next_u64());
    CHECK(differs);

    // uniform draws stay strictly inside (0,1)
    SplitMix64 u(7);
    for (int i = 0; i < 1000; ++i) {
        const double v = u.next_unit();
        CHECK(v > 0.0);
        CHECK(v < 1.0);
    }
}

TEST_CASE("step-mean generator obeys its declared construction") {
    StreamSpec spec;
    spec.kind = StreamKind::StepMean;
    spec.seed = 17;

    const StreamData a = gen_step_mean(spec);
    const StreamData b = gen_step_mean(spec);
    REQUIRE(a.batches.size() == 30);
    for (std::size_t i = 0; i < 30; ++i) {
        CHECK(a.batches[i].targets[0] == b.batches[i].targets[0]);  // replay
        CHECK(a.batches[i].features(0, 0) == 1.0);
    }

    // noiseless: observations equal the step function, two unit steps
    spec.params["noise_std"] = 0.0;
    const StreamData clean = gen_step_mean(spec);
    int changes = 0;
    double level = 0.0;
    for (std::size_t t = 0; t < 30; ++t) {
        if (clean.truth->is_change[t]) {
            ++changes;
            level += 1.0;
            CHECK(t >= 5);
            CHECK(t <= 25);
        }
        CHECK(clean.batches[t].targets[0] == level);
        CHECK(clean.truth->params(static_cast<int>(t), 0) == level);
    }
    CHECK(changes == 2);
}

TEST_CASE("segment sample means satisfy a CLT bound across 100 seeds") {
    int checks = 0, violations = 0;
    for (uint64_t seed = 0; seed < 100; ++seed) {
        StreamSpec spec;
        spec.kind = StreamKind::StepMean;
        spec.seed = seed;
        const StreamData sd = gen_step_mean(spec);
        int seg_start = 0;
        for (int t = 1; t <= 30; ++t) {
            if (t == 30 || sd.truth->is_change[static_cast<std::size_t>(t)]) {
                const int n_seg = t - seg_start;
                if (n_seg >= 2) {
                    double mean = 0.0;
                    for (int u = seg_start; u < t; ++u) mean += sd.batches[static_cast<std::size_t>(u)].targets[0];
                    mean /= n_seg;
                    const double level = sd.truth->params(seg_start, 0);
                    ++checks;
                    if (std::abs(mean - level) > 3.0 * (0.5 / std::sqrt(static_cast<double>(n_seg)))) {
                        ++violations;
                    }
                }
                seg_start = t;
            }
        }
    }
    CHECK(checks >= 290);
    // P(|z| > 3) ~ 0.27% per segment; the fixed seed set realizes a handful at most
    CHECK(violations <= static_cast<int>(0.02 * checks));
}

TEST_CASE("two-lines generator volumes and noiseless closed forms") {
    StreamSpec spec;
    spec.kind = StreamKind::TwoLines;
    spec.seed = 23;
    spec.params["noise_std"] = 0.0;
    const StreamData sd = gen_two_lines(spec);
    REQUIRE(sd.batches.size() == 40);
    CHECK(sd.truth->is_change[20] == 1);

    for (std::size_t t = 0; t < 40; ++t) {
        const double x = sd.batches[t].features(0, 0);
        CHECK(sd.batches[t].features(0, 1) == 1.0);
        CHECK(x >= -1.0);
        CHECK(x <= 1.0);
        const double expect = t < 20 ? 0.7 * x - 0.5 : -0.7 * x + 0.5;
        CHECK(sd.batches[t].targets[0] == doctest::Approx(expect).epsilon(1e-15));
    }

    // least-squares on each noiseless segment recovers the generating lines
    CHECK(ols_slope_intercept(sd, 0, 20, true) == doctest::Approx(0.7).epsilon(1e-12));
    CHECK(ols_slope_intercept(sd, 0, 20, false) == doctest::Approx(-0.5).epsilon(1e-12));
    CHECK(ols_slope_intercept(sd, 20, 40, true) == doctest::Approx(-0.7).epsilon(1e-12));
    CHECK(ols_slope_intercept(sd, 20, 40, false) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("piecewise generator marks segment starts and replays") {
    StreamSpec spec;
    spec.kind = StreamKind::PiecewiseCustom;
    spec.seed = 3;
    spec.params["segments"] = 3;
    spec.params["seg_len"] = 4;
    spec.params["dim"] = 2;
    const StreamData sd = gen_piecewise(spec);
    REQUIRE(sd.batches.size() == 12);
    CHECK(sd.feature_dim == 2);
    CHECK(sd.truth->is_change[0] == 0);
    CHECK(sd.truth->is_change[4] == 1);
    CHECK(sd.truth->is_change[8] == 1);
    // one weight vector per segment, constant inside
    CHECK(sd.truth->params(0, 0) == sd.truth->params(3, 0));
    CHECK(sd.truth->params(4, 0) != sd.truth->params(3, 0));

    const StreamData again = gen_piecewise(spec);
    for (std::size_t t = 0; t < 12; ++t) CHECK(sd.batches[t].targets[0] == again.batches[t].targets[0]);
}

TEST_CASE("csv loader preserves order and parses strictly") {
    TempCsv csv("a,b,y\n1,10,0.5\n2,20,1.5\n3,30,2.5\n");
    CsvSchema schema;
    schema.feature_cols = {"a", "b"};
    schema.target_cols = {"y"};
    const StreamData sd = load_csv_stream(csv.path, schema);
    REQUIRE(sd.batches.size() == 3);
    CHECK(sd.batches[0].features(0, 0) == 1.0);
    CHECK(sd.batches[1].features(0, 1) == 20.0);
    CHECK(sd.batches[2].targets[0] == 2.5);
}

TEST_CASE("csv loader reports the offending row") {
    TempCsv bad("a,y\n1,0.5\nnot_a_number,0.5\n");
    CsvSchema schema;
    schema.feature_cols = {"a"};
    schema.target_cols = {"y"};
    try {
        load_csv_stream(bad.path, schema);
        FAIL("expected an ingestion error");
    } catch (const std::runtime_error& e) {
        CHECK(std::string(e.what()).find("line 3") != std::string::npos);
    }

    TempCsv nan_row("a,y\n1,0.5\n2,nan\n");
    CHECK_THROWS_AS(load_csv_stream(nan_row.path, schema), std::runtime_error);

    TempCsv missing("a,z\n1,2\n");
    CHECK_THROWS_AS(load_csv_stream(missing.path, schema), std::runtime_error);
}

TEST_CASE("validation-prefix standardization centers the prefix exactly") {
    std::string content = "f0,f1,y\n";
    SplitMix64 rng(77u);
    for (int i = 0; i < 20; ++i) {
        char buf[128];
        std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", 3.0 + 2.0 * rng.next_normal(),
                      -5.0 + 0.1 * rng.next_normal(), rng.next_normal());
        content += buf;
    }
    TempCsv csv(content);
    CsvSchema schema;
    schema.feature_cols = {"f0", "f1"};
    schema.target_cols = {"y"};
    schema.standardize = true;
    schema.validation_prefix = 12;
    const StreamData sd = load_csv_stream(csv.path, schema);

    for (int j = 0; j < 2; ++j) {
        double mean = 0.0;
        for (int i = 0; i < 12; ++i) mean += sd.batches[static_cast<std::size_t>(i)].features(0, j);
        mean /= 12;
        double ss = 0.0;
        for (int i = 0; i < 12; ++i) {
            const double d = sd.batches[static_cast<std::size_t>(i)].features(0, j) - mean;
            ss += d * d;
        }
        const double sdv = std::sqrt(ss / 11);
        CHECK(std::abs(mean) < 1e-10);
        CHECK(std::abs(sdv - 1.0) < 1e-10);
    }
}

TEST_CASE("probability targets are encoded with the declared fills") {
    TempCsv csv("x,p\n1,1\n1,0\n1,0.5\n1,0.9\n");
    CsvSchema schema;
    schema.feature_cols = {"x"};
    schema.target_cols = {"p"};
    schema.prob_target = true;
    schema.lo_fill = -4.0;
    schema.hi_fill = 4.0;
    const StreamData sd = load_csv_stream(csv.path, schema);
    CHECK(sd.batches[0].targets[0] == 4.0);
    CHECK(sd.batches[1].targets[0] == -4.0);
    CHECK(sd.batches[2].targets[0] == doctest::Approx(0.0));
    CHECK(sd.batches[3].targets[0] == doctest::Approx(std::log(9.0)).epsilon(1e-12));
    REQUIRE(sd.batches[0].raw_probs.has_value());
    CHECK((*sd.batches[0].raw_probs)[0] == 1.0);

    TempCsv out_of_range("x,p\n1,1.2\n");
    CHECK_THROWS_AS(load_csv_stream(out_of_range.path, schema), std::runtime_error);
}

TEST_CASE("multi-target schemas produce per-dimension batches with shared features") {
    TempCsv csv("x0,x1,u,v\n1,2,0.5,5\n3,4,1.5,6\n");
    CsvSchema schema;
    schema.feature_cols = {"x0", "x1"};
    schema.target_cols = {"u", "v"};
    const StreamData sd = load_csv_stream(csv.path, schema);
    CHECK(sd.target_dims == 2);
    REQUIRE(sd.extra_target_dims.size() == 1);
    REQUIRE(sd.extra_target_dims[0].size() == 2);
    CHECK(sd.batches[0].targets[0] == 0.5);
    CHECK(sd.extra_target_dims[0][0].targets[0] == 5.0);
    CHECK(max_abs_diff(sd.extra_target_dims[0][1].features, sd.batches[1].features) == 0.0);
}
