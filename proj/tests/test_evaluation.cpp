#include <doctest.h>

#include <cmath>

#include "poolmatch/evaluation.hpp"
#include "poolmatch/rng.hpp"

using namespace poolmatch;

TEST_CASE("error_norm") {
    const Eigen::VectorXd zero2 = Eigen::VectorXd::Zero(2);
    CHECK(error_norm(zero2, zero2) == 0.0);
    CHECK(error_norm((Eigen::VectorXd(2) << 3, 4).finished(), zero2) == doctest::Approx(5.0));
    CHECK(error_norm((Eigen::VectorXd(2) << 1, 1).finished(), zero2) ==
          doctest::Approx(std::sqrt(2.0)));
    CHECK_THROWS_AS(error_norm(zero2, Eigen::VectorXd::Zero(3)), std::invalid_argument);
}

TEST_CASE("da_score pinned values") {
    DaInput flat;
    flat.y = {80, 80, 80, 80, 80};
    CHECK(da_score(flat) == 4.0);

    DaInput falling;
    falling.y = {90, 80, 70, 60, 50};
    CHECK(da_score(falling) == 0.0);

    DaInput rising;
    rising.y = {80, 81, 82, 83, 84};
    CHECK(da_score(rising) == doctest::Approx(4.1).epsilon(1e-12));
}

TEST_CASE("da_score is shift-invariant") {
    Rng rng(3);
    for (int t = 0; t < 500; ++t) {
        DaInput a;
        for (auto& y : a.y) y = rng.uniform(40.0, 95.0);
        DaInput b = a;
        const double shift = rng.uniform(-30.0, 30.0);
        for (auto& y : b.y) y += shift;
        CHECK(da_score(a) == doctest::Approx(da_score(b)).epsilon(1e-9));
    }
}

TEST_CASE("da_score threshold semantics under bounded steps") {
    // With per-step changes below 10 / max(s) = 25 the certificate is exact:
    // score >= 4 iff no step decreased.  Steps here stay within +-10 points.
    Rng rng(5);
    for (int t = 0; t < 10000; ++t) {
        DaInput input;
        input.y[0] = rng.uniform(40.0, 90.0);
        bool drop = false;
        for (int i = 1; i < 5; ++i) {
            const double step = rng.uniform(-10.0, 10.0);
            input.y[static_cast<std::size_t>(i)] = input.y[static_cast<std::size_t>(i - 1)] + step;
            drop = drop || step < 0.0;
        }
        const double score = da_score(input);
        CHECK((score >= 4.0) == !drop);
    }
}

TEST_CASE("da_score: huge rebounds can mask a drop (bounded-step premise matters)") {
    DaInput wild;
    wild.y = {50, 10, 90, 95, 99};
    CHECK(da_score(wild) > 4.0);  // one drop, yet the gains repay the lost point
}

TEST_CASE("covariance limit diagnostics") {
    const Eigen::VectorXd zero2 = Eigen::VectorXd::Zero(2);

    // degenerate meta-distribution: the pooled limit is sigma^2 I
    const auto domains = sample_domains(MetaSpec::TwoPoint(zero2, zero2, 0.0), 30, 1.0, 400, 2);
    const PooledResult pooled = naive_pool(domains);
    const double rel = covariance_limit_check(pooled, 1.0, Eigen::MatrixXd::Zero(2, 2),
                                              CovarianceLimit::pool_limit);
    CHECK(rel < 0.05);

    // matching on a well-separated two-point spec recovers sigma^2 I
    Eigen::VectorXd offset(2);
    offset << 4.0, 0.0;
    const auto spec = MetaSpec::TwoPoint(zero2, offset, 0.3);
    Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(2, 2);
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const auto doms = sample_domains(spec, 40, 0.8, 150, seed);
        MatchOptions options;
        options.tau = 1.2;
        acc += match_domains(doms, options).pooled.covariance_estimate;
    }
    const double rel_match = covariance_limit_check(acc / 10.0, 0.8, Eigen::MatrixXd::Zero(2, 2),
                                                    CovarianceLimit::match_limit);
    CHECK(rel_match < 0.10);
}

TEST_CASE("trajectory consistency") {
    Trajectory good;
    good.steps = {{5, Strategy::matching, 0.40, 0.0, 5, true},
                  {6, Strategy::matching, 0.35, -0.05, 6, true},
                  {7, Strategy::matching, 0.35, 0.0, 6, false}};
    CHECK(good.consistent());

    Trajectory bad = good;
    bad.steps[2].delta_epsilon = 0.2;
    CHECK_FALSE(bad.consistent());

    Trajectory negative = good;
    negative.steps[1].epsilon = -0.1;
    CHECK_FALSE(negative.consistent());
}
