#include "poolmatch/metric.hpp"

#include <cmath>
#include <stdexcept>

namespace poolmatch {

MetricSpec MetricSpec::Euclidean() {
    return MetricSpec{MetricKind::euclidean, 1.0, 1.0, 1.0};
}

MetricSpec MetricSpec::Scaled(double factor) {
    if (!(factor > 0.0)) throw std::invalid_argument("scaled metric requires factor > 0");
    return MetricSpec{MetricKind::scaled, factor, factor, factor};
}

MetricSpec MetricSpec::GeodesicChord() {
    return MetricSpec{MetricKind::geodesic_chord, 1.0, 2.0 / M_PI, 1.0};
}

const char* MetricSpec::kind_name() const {
    switch (kind) {
        case MetricKind::euclidean: return "euclidean";
        case MetricKind::scaled: return "scaled";
        case MetricKind::geodesic_chord: return "geodesic_chord";
    }
    return "unknown";
}

double metric_eval(const MetricSpec& metric, const Eigen::Ref<const Eigen::VectorXd>& v) {
    if (v.size() == 0) throw std::invalid_argument("metric_eval: empty vector");
    const double r = v.norm();
    switch (metric.kind) {
        case MetricKind::euclidean:
            return r;
        case MetricKind::scaled:
            return metric.scale * r;
        case MetricKind::geodesic_chord:
            return r <= M_PI ? 2.0 * std::sin(0.5 * r) : (2.0 / M_PI) * r;
    }
    throw std::logic_error("metric_eval: unhandled kind");
}

TauBands tau_bands(const MetricSpec& metric, double eps_K, double tau) {
    if (eps_K < 0.0) throw std::invalid_argument("tau_bands: eps_K must be >= 0");
    if (!(tau > 0.0)) throw std::invalid_argument("tau_bands: tau must be > 0");
    TauBands bands;
    bands.exclusion_radius = eps_K + tau / metric.m;
    if (tau > metric.L * eps_K) {
        bands.inclusion_radius = tau / metric.L - eps_K;
    }
    return bands;
}

}  // namespace poolmatch
