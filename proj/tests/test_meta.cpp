#include <doctest.h>

#include <cmath>

#include "poolmatch/meta.hpp"
#include "poolmatch/rng.hpp"

using namespace poolmatch;

namespace {
Eigen::VectorXd zeros(int d) { return Eigen::VectorXd::Zero(d); }
}  // namespace

TEST_CASE("domain mean generation is deterministic and prefix-stable") {
    const auto spec = MetaSpec::Symmetric(zeros(3), 1.5);
    const auto a = sample_domain_means(spec, 20, 42);
    const auto b = sample_domain_means(spec, 20, 42);
    REQUIRE(a.size() == 20);
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i] == b[i]);

    // growing K extends the same sequence
    const auto shorter = sample_domain_means(spec, 5, 42);
    for (std::size_t i = 0; i < shorter.size(); ++i) CHECK(shorter[i] == a[i]);

    const auto other_seed = sample_domain_means(spec, 20, 43);
    CHECK(other_seed[0] != a[0]);
}

TEST_CASE("two_point: degenerate and Bernoulli cases") {
    Eigen::VectorXd c(1);
    c << 2.0;
    const auto degenerate = MetaSpec::TwoPoint(zeros(1), c, 0.0);
    for (const auto& mean : sample_domain_means(degenerate, 10, 5)) CHECK(mean[0] == 0.0);

    // P(at least one outlier among K=2) = 1 - (1-p)^2 = 0.75
    const auto spec = MetaSpec::TwoPoint(zeros(1), c, 0.5);
    int hits = 0;
    const int trials = 20000;
    for (int s = 0; s < trials; ++s) {
        const auto means = sample_domain_means(spec, 2, static_cast<std::uint64_t>(s));
        if (means[0][0] != 0.0 || means[1][0] != 0.0) ++hits;
    }
    CHECK(std::abs(static_cast<double>(hits) / trials - 0.75) < 0.02);
}

TEST_CASE("symmetric generator concentrates at mu_star") {
    const double gamma = 1.5;
    const int K = 10000;
    const auto means = sample_domain_means(MetaSpec::Symmetric(zeros(2), gamma), K, 7);
    Eigen::VectorXd avg = zeros(2);
    for (const auto& m : means) avg += m;
    avg /= static_cast<double>(K);
    const double bound = 4.0 * gamma / std::sqrt(static_cast<double>(K));
    CHECK(std::abs(avg[0]) < bound);
    CHECK(std::abs(avg[1]) < bound);
}

TEST_CASE("symmetric generator is sign-symmetric in first and third moments") {
    const int draws = 100000;
    const auto means = sample_domain_means(MetaSpec::Symmetric(zeros(2), 1.5), draws, 99);
    Eigen::VectorXd m1 = zeros(2), m3 = zeros(2);
    for (const auto& m : means) {
        m1 += m;
        m3 += m.array().cube().matrix();
    }
    m1 /= draws;
    m3 /= draws;
    // X and -X share first/third moments iff both vanish; MC error bands at
    // 5 standard errors (sd(X^3) for N(0,g^2) is sqrt(15) g^3).
    const double g = 1.5;
    const double se1 = g / std::sqrt(static_cast<double>(draws));
    const double se3 = std::sqrt(15.0) * g * g * g / std::sqrt(static_cast<double>(draws));
    for (int j = 0; j < 2; ++j) {
        CHECK(std::abs(m1[j]) < 5.0 * se1);
        CHECK(std::abs(m3[j]) < 5.0 * se3);
    }
}

TEST_CASE("asymmetric generator shifts the mean of means along its direction") {
    Eigen::VectorXd dir(2);
    dir << 1.0, 0.0;
    const double alpha = 1.5;
    const auto spec = MetaSpec::Asymmetric(zeros(2), alpha, dir);
    const int K = 50000;
    const auto means = sample_domain_means(spec, K, 3);
    Eigen::VectorXd avg = zeros(2);
    for (const auto& m : means) avg += m;
    avg /= static_cast<double>(K);
    const Eigen::VectorXd expected = spec.mean_of_means();
    CHECK(expected[0] > 0.0);
    CHECK(std::abs(avg[0] - expected[0]) < 0.05);
    CHECK(std::abs(avg[1]) < 0.05);

    // closed-form covariance against a large-sample estimate
    Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(2, 2);
    for (const auto& m : means) cov += (m - avg) * (m - avg).transpose();
    cov /= static_cast<double>(K - 1);
    CHECK((cov - spec.sigma_mu()).norm() / spec.sigma_mu().norm() < 0.05);
}

TEST_CASE("sample_domain: zero sigma copies the mean, positive sigma concentrates") {
    Eigen::VectorXd mean(2);
    mean << 0.3, -0.7;
    const Domain exact = sample_domain(mean, 0.0, 25, 9, 4);
    CHECK(exact.index == 4);
    for (int i = 0; i < exact.count(); ++i)
        CHECK(exact.samples.row(i).transpose() == mean);

    // sigma = 0.8, N = 150: empirical mean within 3 sigma / sqrt(N) per
    // coordinate, checked over 10 seeds
    const double sigma = 0.8;
    const int N = 150;
    const double bound = 3.0 * sigma / std::sqrt(static_cast<double>(N));
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const Domain dom = sample_domain(mean, sigma, N, seed, 1);
        const Eigen::VectorXd err = dom.empirical_mean() - mean;
        CHECK(std::abs(err[0]) < bound);
        CHECK(std::abs(err[1]) < bound);
    }
}

TEST_CASE("sample_domain: empirical covariance approaches sigma^2 I") {
    const Domain dom = sample_domain(zeros(2), 1.0, 10000, 21, 1);
    const Eigen::VectorXd mu = dom.empirical_mean();
    Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(2, 2);
    for (int i = 0; i < dom.count(); ++i) {
        const Eigen::VectorXd r = dom.samples.row(i).transpose() - mu;
        cov += r * r.transpose();
    }
    cov /= static_cast<double>(dom.count() - 1);
    CHECK((cov - Eigen::MatrixXd::Identity(2, 2)).norm() < 0.1);
}

TEST_CASE("outlier sequence placement") {
    const auto base = MetaSpec::Symmetric(zeros(2), 0.5);

    const auto means6 = outlier_sequence_means(base, 2.5, 3, 6, 17);
    for (int k = 1; k <= 6; ++k) {
        const double dist = means6[static_cast<std::size_t>(k - 1)].norm();
        if (k % 3 == 0) {
            CHECK(dist == 2.5);  // axis placement keeps the norm bit-exact
        } else {
            CHECK(dist != 2.5);
        }
    }

    const auto all = outlier_sequence_means(base, 1.0, 1, 7, 17);
    for (const auto& m : all) CHECK(m.norm() == 1.0);

    const auto means30 = outlier_sequence_means(base, 2.5, 3, 30, 17);
    int outliers = 0;
    for (const auto& m : means30)
        if (m.norm() == 2.5) ++outliers;
    CHECK(outliers == 10);

    // one shared direction per sequence: all outliers coincide
    Eigen::VectorXd first;
    bool found = false;
    for (int k = 3; k <= 30; k += 3) {
        const auto& m = means30[static_cast<std::size_t>(k - 1)];
        if (!found) {
            first = m;
            found = true;
        } else {
            CHECK(m == first);
        }
    }
}

TEST_CASE("Monte-Carlo covariance oracle matches the closed forms") {
    Eigen::VectorXd dir(2);
    dir << 0.6, 0.8;
    const auto spec = MetaSpec::Asymmetric(zeros(2), 1.5, dir);
    const Eigen::MatrixXd mc = sigma_mu_monte_carlo(spec, 200000, 5);
    CHECK((mc - spec.sigma_mu()).norm() / spec.sigma_mu().norm() < 0.03);

    // and provides the oracle where no closed form exists
    const auto seq = MetaSpec::OutlierSequence(MetaSpec::Symmetric(zeros(2), 0.5), 2.5, 3);
    CHECK_FALSE(seq.has_closed_form_sigma_mu());
    const Eigen::MatrixXd est = sigma_mu_monte_carlo(seq, 90000, 6);
    // a 1/3 point mass at norm 2.5 mixed with N(0, 0.25 I):
    // trace = (2/9) 2.5^2 + (2/3) 2 (0.25) = 1.7222...
    const double expected_trace = 2.0 / 9.0 * 6.25 + 2.0 / 3.0 * 0.5;
    CHECK(std::abs(est.trace() - expected_trace) < 0.05);
}

TEST_CASE("meta spec validation errors") {
    CHECK_THROWS_AS(MetaSpec::Symmetric(zeros(2), 0.0), std::invalid_argument);
    CHECK_THROWS_AS(MetaSpec::TwoPoint(zeros(2), zeros(2), 1.5), std::invalid_argument);
    CHECK_THROWS_AS(MetaSpec::Asymmetric(zeros(2), 1.0, zeros(2)), std::invalid_argument);
    CHECK_THROWS_AS(sample_domain(zeros(2), -1.0, 5, 0), std::invalid_argument);
    CHECK_THROWS_AS(sample_domain(zeros(2), 1.0, 0, 0), std::invalid_argument);
    const auto spec = MetaSpec::Symmetric(zeros(2), 1.0);
    CHECK_THROWS_AS(sample_domain_means(spec, 0, 1), std::invalid_argument);
}
