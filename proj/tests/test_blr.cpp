#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "test_support.hpp"
#include "vbs/blr.hpp"

using namespace vbs;

namespace {
BlrModel unit_prior_1d(double sn2 = 1.0) { return BlrModel(GaussianNat::isotropic(1, 1.0), sn2); }

StreamBatch one_row(std::initializer_list<double> xs, double y) {
    StreamBatch b;
    b.features = Mat(1, static_cast<int>(xs.size()));
    int j = 0;
    for (double v : xs) b.features(0, j++) = v;
    b.targets = Vec{y};
    return b;
}
}  // namespace

TEST_CASE("single-row conjugate update arithmetic") {
    const BlrModel m = unit_prior_1d();
    const BlrModel post = blr_update(m, one_row({1.0}, 1.0));
    CHECK(post.weights().precision()(0, 0) == doctest::Approx(2.0));
    CHECK(post.weights().linear()[0] == doctest::Approx(1.0));
    CHECK(post.weights().mean()[0] == doctest::Approx(0.5));
}

TEST_CASE("zero-information row leaves the posterior unchanged") {
    const BlrModel m = unit_prior_1d();
    const BlrModel post = blr_update(m, one_row({0.0}, 3.0));
    CHECK(max_abs_diff(post.weights().precision(), m.weights().precision()) == 0.0);
    CHECK(max_abs_diff(post.weights().linear(), m.weights().linear()) == 0.0);
}

TEST_CASE("streamed update equals the batch conjugate posterior") {
    SplitMix64 rng(41u);
    const int d = 4, n = 30;
    const double sn2 = 0.7;
    const BlrModel m(BlrModel(GaussianNat(testsup::random_spd(rng, d), testsup::random_vec(rng, d)), sn2));
    const StreamBatch batch = testsup::random_batch(rng, n, d);

    const BlrModel post = blr_update(m, batch);
    const testsup::NatParams oracle = testsup::batch_conjugate(
        m.weights().precision(), m.weights().linear(), batch.features, batch.targets, sn2);
    CHECK(max_abs_diff(post.weights().precision(), oracle.precision) < 1e-10);
    CHECK(max_abs_diff(post.weights().linear(), oracle.eta) < 1e-10);
}

TEST_CASE("single-point evidence closed form") {
    const BlrModel m = unit_prior_1d();
    // log N(0; 0, 2) = -1/2 log(4 pi)
    CHECK(blr_log_evidence(m, one_row({1.0}, 0.0)) ==
          doctest::Approx(-1.2655121234846454).epsilon(1e-9));
}

TEST_CASE("evidence is symmetric in the sign of a centred target") {
    const BlrModel m = unit_prior_1d();
    const double a = 0.8315;
    CHECK(blr_log_evidence(m, one_row({1.0}, a)) ==
          doctest::Approx(blr_log_evidence(m, one_row({1.0}, -a))).epsilon(1e-14));
}

TEST_CASE("chained evidence equals the normalizer-ratio closed form") {
    SplitMix64 rng(42u);
    for (int rep = 0; rep < 5; ++rep) {
        const int d = 3, n = 5;
        const double sn2 = 0.4;
        const Mat prec = testsup::random_spd(rng, d);
        const Vec eta = testsup::random_vec(rng, d);
        const BlrModel m(GaussianNat(prec, eta), sn2);
        const StreamBatch batch = testsup::random_batch(rng, n, d);
        const double oracle =
            testsup::evidence_normalizer_ratio(prec, eta, batch.features, batch.targets, sn2);
        CHECK(blr_log_evidence(m, batch) == doctest::Approx(oracle).epsilon(1e-9));
    }
}

TEST_CASE("empty batches violate the precondition") {
    const BlrModel m = unit_prior_1d();
    StreamBatch empty;
    empty.features = Mat(0, 1);
    CHECK_THROWS_AS(blr_update(m, empty), std::invalid_argument);
}

TEST_CASE("prior and posterior predictive closed forms") {
    const BlrModel m = unit_prior_1d();
    const PredictiveGaussian prior_pred = blr_predict(m, Vec{1.0});
    CHECK(prior_pred.mean == doctest::Approx(0.0));
    CHECK(prior_pred.var == doctest::Approx(2.0));

    const PredictiveGaussian noise_only = blr_predict(m, Vec{0.0});
    CHECK(noise_only.mean == doctest::Approx(0.0));
    CHECK(noise_only.var == doctest::Approx(1.0));

    const BlrModel post = blr_update(m, one_row({1.0}, 1.0));
    const PredictiveGaussian p = blr_predict(post, Vec{1.0});
    CHECK(p.mean == doctest::Approx(0.5).epsilon(1e-9));
    CHECK(p.var == doctest::Approx(1.5).epsilon(1e-9));

    CHECK_THROWS_AS(blr_predict(m, Vec{1.0, 2.0}), std::invalid_argument);
}

TEST_CASE("log-odds encode and median decode") {
    CHECK(logodds_encode(0.5, -5.0, 4.0) == doctest::Approx(0.0));
    CHECK(logodds_encode(0.0, -5.0, 4.0) == -5.0);
    CHECK(logodds_encode(1.0, -5.0, 4.0) == 4.0);
    CHECK(logodds_encode(0.9, -5.0, 4.0) == doctest::Approx(2.1972245773362196).epsilon(1e-12));
    CHECK_THROWS_AS(logodds_encode(-0.1, -5.0, 4.0), std::invalid_argument);
    CHECK_THROWS_AS(logodds_encode(1.1, -5.0, 4.0), std::invalid_argument);
    CHECK_THROWS_AS(logodds_encode(0.5, 4.0, -5.0), std::invalid_argument);

    CHECK(logodds_decode_median({0.0, 1.0}) == doctest::Approx(0.5));
    CHECK(logodds_decode_median({std::log(9.0), 2.0}) == doctest::Approx(0.9).epsilon(1e-12));
    CHECK(logodds_decode_median({-4.0, 0.5}) == doctest::Approx(0.01798620996209156).epsilon(1e-10));
}

TEST_CASE("celbo equals the evidence exactly at the conjugate posterior") {
    SplitMix64 rng(43u);
    for (int rep = 0; rep < 5; ++rep) {
        const int d = 3;
        const double sn2 = 0.6;
        const BlrModel prior(GaussianNat(testsup::random_spd(rng, d), testsup::random_vec(rng, d)), sn2);
        const StreamBatch batch = testsup::random_batch(rng, 6, d);
        const ScoredUpdate u = blr_update_scored(prior, batch);
        const double c = celbo(u.model.weights(), prior.weights(), sn2, batch);
        CHECK(c == doctest::Approx(u.log_evidence).epsilon(1e-8));
    }
}

TEST_CASE("celbo with q = prior has no KL term") {
    const double sn2 = 1e12;
    const BlrModel m(GaussianNat::isotropic(1, 1.0), sn2);
    const StreamBatch batch = one_row({1.0}, 0.7);
    const double c = celbo(m.weights(), m.weights(), sn2, batch);
    // expected log-likelihood of one row under the prior
    const double ell = -0.5 * std::log(2.0 * M_PI * sn2) - (0.7 * 0.7 + 1.0) / (2.0 * sn2);
    CHECK(c == doctest::Approx(ell).epsilon(1e-9));
}

TEST_CASE("any perturbed q scores strictly below the evidence") {
    SplitMix64 rng(44u);
    const int d = 2;
    const double sn2 = 0.5;
    const BlrModel prior(GaussianNat::isotropic(d, 1.0), sn2);
    const StreamBatch batch = testsup::random_batch(rng, 4, d);
    const ScoredUpdate u = blr_update_scored(prior, batch);

    for (int rep = 0; rep < 50; ++rep) {
        Vec eta = u.model.weights().linear();
        Mat prec = u.model.weights().precision();
        for (auto& v : eta) v += 0.2 * rng.next_normal();
        const double scale = std::exp(0.3 * rng.next_normal());
        kernels::scale(scale, prec.data(), prec.size());
        const GaussianNat q(prec, eta);
        const double gap = u.log_evidence - celbo(q, prior.weights(), sn2, batch);
        CHECK(gap >= -1e-9);
    }
}

TEST_CASE("row order never changes the posterior or the evidence") {
    SplitMix64 rng(45u);
    const int d = 3, n = 8;
    const BlrModel m(GaussianNat(testsup::random_spd(rng, d), testsup::random_vec(rng, d)), 0.9);
    const StreamBatch batch = testsup::random_batch(rng, n, d);

    StreamBatch reversed;
    reversed.features = Mat(n, d);
    reversed.targets.resize(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < d; ++j) reversed.features(i, j) = batch.features(n - 1 - i, j);
        reversed.targets[static_cast<std::size_t>(i)] = batch.targets[static_cast<std::size_t>(n - 1 - i)];
    }

    const ScoredUpdate a = blr_update_scored(m, batch);
    const ScoredUpdate b = blr_update_scored(m, reversed);
    CHECK(max_abs_diff(a.model.weights().precision(), b.model.weights().precision()) < 1e-9);
    CHECK(max_abs_diff(a.model.weights().linear(), b.model.weights().linear()) < 1e-9);
    CHECK(a.log_evidence == doctest::Approx(b.log_evidence).epsilon(1e-9));
}

TEST_CASE("two sub-batches compose to the concatenated batch") {
    SplitMix64 rng(46u);
    const int d = 3;
    const BlrModel m(GaussianNat::isotropic(d, 2.0), 0.8);
    const StreamBatch full = testsup::random_batch(rng, 10, d);

    StreamBatch first, second;
    first.features = Mat(4, d);
    first.targets.assign(full.targets.begin(), full.targets.begin() + 4);
    second.features = Mat(6, d);
    second.targets.assign(full.targets.begin() + 4, full.targets.end());
    for (int i = 0; i < 4; ++i) {
        for (int j = 0; j < d; ++j) first.features(i, j) = full.features(i, j);
    }
    for (int i = 0; i < 6; ++i) {
        for (int j = 0; j < d; ++j) second.features(i, j) = full.features(4 + i, j);
    }

    const BlrModel two_step = blr_update(blr_update(m, first), second);
    const BlrModel one_step = blr_update(m, full);
    CHECK(max_abs_diff(two_step.weights().precision(), one_step.weights().precision()) < 1e-12);
    CHECK(max_abs_diff(two_step.weights().linear(), one_step.weights().linear()) < 1e-12);
}

TEST_CASE("posterior precision never loses mass in any direction") {
    SplitMix64 rng(47u);
    const int d = 4;
    const BlrModel m(GaussianNat(testsup::random_spd(rng, d), testsup::random_vec(rng, d)), 0.5);
    const StreamBatch batch = testsup::random_batch(rng, 6, d);
    const BlrModel post = blr_update(m, batch);
    for (int rep = 0; rep < 25; ++rep) {
        const Vec u = testsup::unit_vec(rng, d);
        CHECK(quad_form(post.weights().precision(), u) >= quad_form(m.weights().precision(), u) - 1e-12);
    }
}

TEST_CASE("multi-target updates are independent per dimension") {
    SplitMix64 rng(48u);
    const int d = 3;
    const BlrModel base(GaussianNat::isotropic(d, 1.0), 0.5);
    const StreamBatch b0 = testsup::random_batch(rng, 5, d);

    // identical data in both dims -> identical posteriors
    const auto same = multi_target_update({base, base}, {b0, b0});
    CHECK(max_abs_diff(same[0].weights().precision(), same[1].weights().precision()) == 0.0);
    CHECK(max_abs_diff(same[0].weights().linear(), same[1].weights().linear()) == 0.0);

    // one dim degenerates to blr_update
    const auto single = multi_target_update({base}, {b0});
    const BlrModel direct = blr_update(base, b0);
    CHECK(max_abs_diff(single[0].weights().precision(), direct.weights().precision()) == 0.0);

    // joint evidence is the sum of the per-dimension evidences
    StreamBatch b1 = b0;
    for (auto& y : b1.targets) y += 0.3;
    const double joint = multi_target_log_evidence({base, base}, {b0, b1});
    const double split = blr_log_evidence(base, b0) + blr_log_evidence(base, b1);
    CHECK(joint == doctest::Approx(split).epsilon(1e-12));

    // shared-feature precondition
    StreamBatch other = testsup::random_batch(rng, 5, d);
    CHECK_THROWS_AS(multi_target_update({base, base}, {b0, other}), std::invalid_argument);
    CHECK_THROWS_AS(multi_target_update({base, base}, {b0}), std::invalid_argument);
}

TEST_CASE("batch validation catches malformed inputs") {
    StreamBatch b = one_row({1.0}, 0.5);
    b.raw_probs = Vec{1.5};
    CHECK_THROWS_AS(b.validate(), std::invalid_argument);
    b.raw_probs = Vec{0.5, 0.5};
    CHECK_THROWS_AS(b.validate(), std::invalid_argument);
    b.raw_probs.reset();
    b.targets = Vec{0.1, 0.2};
    CHECK_THROWS_AS(b.validate(), std::invalid_argument);

    const BlrModel m = unit_prior_1d();
    CHECK_THROWS_AS(blr_update(m, one_row({1.0, 2.0}, 0.5)), std::invalid_argument);
}
