#include <doctest.h>

#include <cmath>

#include "poolmatch/metric.hpp"
#include "poolmatch/pooling.hpp"
#include "poolmatch/rng.hpp"

using namespace poolmatch;

namespace {
Eigen::VectorXd vec2(double a, double b) {
    Eigen::VectorXd v(2);
    v << a, b;
    return v;
}
}  // namespace

TEST_CASE("metric_eval on the supported kinds") {
    const auto euclid = MetricSpec::Euclidean();
    CHECK(metric_eval(euclid, Eigen::VectorXd::Zero(3)) == 0.0);
    CHECK(metric_eval(euclid, vec2(3, 4)) == doctest::Approx(5.0));
    CHECK(metric_eval(MetricSpec::Scaled(2.0), vec2(3, 4)) == doctest::Approx(10.0));

    const auto chord = MetricSpec::GeodesicChord();
    // arc pi/2 scores as its chord 2 sin(pi/4) = sqrt(2)
    CHECK(metric_eval(chord, vec2(M_PI_2, 0)) == doctest::Approx(std::sqrt(2.0)));

    CHECK_THROWS_AS(metric_eval(euclid, Eigen::VectorXd()), std::invalid_argument);
    CHECK_THROWS_AS(MetricSpec::Scaled(0.0), std::invalid_argument);
}

TEST_CASE("positive homogeneity for the homogeneous kinds") {
    Rng rng(7);
    for (const auto& metric : {MetricSpec::Euclidean(), MetricSpec::Scaled(1.7)}) {
        for (int t = 0; t < 200; ++t) {
            const int d = 1 + static_cast<int>(rng.uniform_index(6));
            const Eigen::VectorXd v = rng.normal_vector(d);
            const double a = rng.uniform(0.01, 10.0);
            CHECK(metric_eval(metric, a * v) ==
                  doctest::Approx(a * metric_eval(metric, v)).epsilon(1e-12));
        }
    }
}

TEST_CASE("bi-Lipschitz envelope holds for every kind") {
    Rng rng(11);
    for (const auto& metric :
         {MetricSpec::Euclidean(), MetricSpec::Scaled(0.3), MetricSpec::Scaled(2.5),
          MetricSpec::GeodesicChord()}) {
        REQUIRE(metric.m > 0.0);
        REQUIRE(metric.m <= metric.L);
        for (int t = 0; t < 2000; ++t) {
            const int d = 1 + static_cast<int>(rng.uniform_index(5));
            const Eigen::VectorXd v = rng.uniform(0.0, 6.0) * rng.unit_vector(d);
            const double value = metric_eval(metric, v);
            CHECK(value >= metric.m * v.norm() - 1e-12);
            CHECK(value <= metric.L * v.norm() + 1e-12);
            if (v.norm() > 0.0) CHECK(value > 0.0);
        }
    }
}

TEST_CASE("geodesic chord is monotone in the magnitude") {
    const auto chord = MetricSpec::GeodesicChord();
    double previous = 0.0;
    for (double r = 0.0; r <= 8.0; r += 0.01) {
        const double value = metric_eval(chord, vec2(r, 0));
        CHECK(value >= previous);
        previous = value;
    }
}

TEST_CASE("tau_bands values") {
    const auto euclid = MetricSpec::Euclidean();
    const TauBands b1 = tau_bands(euclid, 0.2, 0.5);
    CHECK(b1.exclusion_radius == doctest::Approx(0.7));
    REQUIRE(b1.inclusion_radius.has_value());
    CHECK(*b1.inclusion_radius == doctest::Approx(0.3));

    // band empty iff tau <= L * eps
    CHECK_FALSE(tau_bands(euclid, 0.5, 0.4).inclusion_radius.has_value());

    const TauBands b3 = tau_bands(euclid, 0.0, 0.9);
    CHECK(b3.exclusion_radius == doctest::Approx(0.9));
    REQUIRE(b3.inclusion_radius.has_value());
    CHECK(*b3.inclusion_radius == doctest::Approx(0.9));

    CHECK_THROWS_AS(tau_bands(euclid, -0.1, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(tau_bands(euclid, 0.1, 0.0), std::invalid_argument);
}

TEST_CASE("band consistency: inclusion below exclusion") {
    Rng rng(23);
    for (int t = 0; t < 500; ++t) {
        const MetricSpec metric =
            t % 3 == 0 ? MetricSpec::Euclidean()
                       : (t % 3 == 1 ? MetricSpec::Scaled(rng.uniform(0.2, 3.0))
                                     : MetricSpec::GeodesicChord());
        const TauBands b = tau_bands(metric, rng.uniform(0.0, 1.0), rng.uniform(0.1, 2.0));
        if (b.inclusion_radius) CHECK(*b.inclusion_radius < b.exclusion_radius);
    }
}

// End-to-end soundness of the bands against the actual matching rule, with
// exact domain means (sigma = 0) so the oracle radii apply directly.
TEST_CASE("bands are sound against match_domains") {
    Rng rng(31);
    for (int trial = 0; trial < 50; ++trial) {
        const int d = 2;
        const double tau = rng.uniform(0.6, 1.4);
        const Eigen::VectorXd mu_star = Eigen::VectorXd::Zero(d);

        std::vector<Domain> domains;
        int index = 1;
        for (int i = 0; i < 8; ++i) {
            const Eigen::VectorXd mean = 0.4 * rng.normal_vector(d);
            domains.push_back(sample_domain(mean, 0.0, 1, 0, index++));
        }
        for (int i = 0; i < 4; ++i) {
            const Eigen::VectorXd mean = (4.0 + rng.uniform(0.0, 2.0)) * rng.unit_vector(d);
            domains.push_back(sample_domain(mean, 0.0, 1, 0, index++));
        }

        MatchOptions options;
        options.tau = tau;
        options.init = CentroidInit::median;
        const MatchOutcome outcome = match_domains(domains, options);

        const double eps = (outcome.state.centroid - mu_star).norm();
        const TauBands bands = tau_bands(options.metric, eps, tau);
        for (const auto& dom : domains) {
            const double dist = (dom.mean - mu_star).norm();
            if (dist > bands.exclusion_radius)
                CHECK(outcome.state.matched.count(dom.index) == 0);
            if (bands.inclusion_radius && dist < *bands.inclusion_radius)
                CHECK(outcome.state.matched.count(dom.index) == 1);
        }
    }
}
