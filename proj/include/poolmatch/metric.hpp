#pragma once

// Matching metrics and their bi-Lipschitz envelope relative to the Euclidean
// norm:  m * |v|_2 <= M(v) <= L * |v|_2.  The (m, L) pair is what turns a
// matching radius tau into provable admission/rejection bands around the
// target mean (see tau_bands).

#include <optional>

#include <Eigen/Dense>

namespace poolmatch {

enum class MetricKind {
    euclidean,       // M(v) = |v|_2,            m = L = 1
    scaled,          // M(v) = c * |v|_2,        m = L = c
    geodesic_chord,  // chord score of an arc-valued displacement, m = 2/pi, L = 1
};

struct MetricSpec {
    MetricKind kind = MetricKind::euclidean;
    double scale = 1.0;  // only meaningful for MetricKind::scaled
    double m = 1.0;      // lower Lipschitz constant
    double L = 1.0;      // upper Lipschitz constant

    static MetricSpec Euclidean();
    static MetricSpec Scaled(double factor);

    // Treats |v|_2 as an arc length and scores it by the corresponding chord,
    // M(v) = 2 sin(|v|/2) for |v| <= pi and (2/pi)|v| beyond (continuous).
    // On a spherical cap of half-angle <= pi/2 the arc between two matched
    // points never exceeds pi, where the chord/arc ratio lies in [2/pi, 1];
    // the linear tail keeps that envelope valid for all magnitudes.
    static MetricSpec GeodesicChord();

    const char* kind_name() const;
};

// Evaluates M(v).  Throws std::invalid_argument on an empty vector.
double metric_eval(const MetricSpec& metric, const Eigen::Ref<const Eigen::VectorXd>& v);

struct TauBands {
    // Any domain mean farther than this from the target is provably rejected.
    double exclusion_radius = 0.0;
    // Any domain mean within this of the target is provably admitted.
    // Present iff tau > L * eps_K (otherwise the band is empty).
    std::optional<double> inclusion_radius;
};

// Admission bands for the rule M(mu - c) < tau when the centroid sits at
// distance eps_K from the target.  eps_K may be the oracle distance (known
// target, used by tests) or an estimate (field mode); the algebra is the same.
TauBands tau_bands(const MetricSpec& metric, double eps_K, double tau);

}  // namespace poolmatch
