#include <algorithm>
#include <cmath>

#include "poolmatch/evaluation.hpp"
#include "poolmatch/flow.hpp"
#include "poolmatch/harness.hpp"
#include "poolmatch/rng.hpp"

// Randomized audits behind the CLI `audit` subcommand: matched-set properties
// on a Gaussian cloud, admission-band soundness trials, and the transport
// inequalities over seeded random flows.

namespace poolmatch {

namespace {

constexpr std::uint64_t kBandStream2 = 0x62616e6432ULL;
constexpr std::uint64_t kFlowStream2 = 0x666c6f7732ULL;
constexpr std::uint64_t kCloudStream2 = 0x636c6f7532ULL;

nlohmann::ordered_json check_entry(const std::string& name, bool passed) {
    nlohmann::ordered_json j;
    j["name"] = name;
    j["passed"] = passed;
    return j;
}

MetricSpec random_metric(Rng& rng) {
    switch (rng.uniform_index(3)) {
        case 0: return MetricSpec::Euclidean();
        case 1: return MetricSpec::Scaled(rng.uniform(0.5, 2.0));
        default: return MetricSpec::GeodesicChord();
    }
}

}  // namespace

nlohmann::ordered_json audit_properties(const RunConfig& config) {
    config.validate();
    const std::uint64_t seed0 = config.seeds.front();

    nlohmann::ordered_json report;
    report["schema_version"] = 1;
    report["kind"] = "properties";
    report["config"] = config.to_json();
    auto checks = nlohmann::ordered_json::array();

    // Matched-set properties on a standard Gaussian cloud around the origin.
    const Domain cloud = sample_domain(Eigen::VectorXd::Zero(config.d), 1.0,
                                       static_cast<int>(config.cloud_n),
                                       derive_seed(seed0, kCloudStream2), 1);
    MatchState state;
    state.centroid = Eigen::VectorXd::Zero(config.d);
    state.metric = config.metric;
    state.tau = config.taus.empty() ? config.tau : config.taus.back();
    const MatchedSetReport set_report =
        matched_set_report(state, {cloud}, config.taus, config.trial_count, seed0);

    {
        auto j = check_entry("matched_set_monotonicity", set_report.all_subset_checks_hold());
        j["pairs"] = set_report.monotonicity.size();
        checks.push_back(j);
    }
    {
        bool norms = true, variances = true;
        auto per_tau = nlohmann::ordered_json::array();
        for (const auto& t : set_report.per_tau) {
            norms = norms && t.norm_concentrated;
            variances = variances && t.variance_bounded;
            nlohmann::ordered_json j;
            j["tau"] = t.tau;
            j["set_size"] = t.set_size;
            j["norm_gap"] = t.norm_gap;
            j["norm_bound"] = t.norm_bound;
            j["variance"] = t.variance;
            j["variance_bound"] = t.variance_bound;
            per_tau.push_back(j);
        }
        auto jn = check_entry("matched_set_norm_concentration", norms);
        jn["per_tau"] = per_tau;
        checks.push_back(jn);
        checks.push_back(check_entry("matched_set_variance_bound", variances));
    }
    {
        const bool fitted = set_report.decay_exponent.has_value();
        const double expo = fitted ? *set_report.decay_exponent : 0.0;
        const bool in_band = fitted && std::abs(expo - config.d) <= 0.5;
        auto j = check_entry("matched_set_decay_exponent", in_band);
        if (fitted) j["exponent"] = expo;
        if (!set_report.notice.empty()) j["notice"] = set_report.notice;
        j["expected"] = config.d;
        checks.push_back(j);
    }

    // Admission-band soundness: the rule M(mu - c) < tau must reject every
    // mean beyond the exclusion radius and admit every mean strictly inside
    // the inclusion radius.  Exact comparisons, no tolerance.
    long exclusion_violations = 0, inclusion_violations = 0;
    long exclusion_cases = 0, inclusion_cases = 0;
    for (long trial = 0; trial < config.band_trials; ++trial) {
        Rng rng(derive_seed(seed0, kBandStream2, static_cast<std::uint64_t>(trial)));
        const MetricSpec metric = random_metric(rng);
        const int d = 1 + static_cast<int>(rng.uniform_index(5));
        const Eigen::VectorXd mu_star = 0.5 * rng.normal_vector(d);
        const double eps = rng.uniform(0.0, 0.8);
        const Eigen::VectorXd centroid =
            d == 1 ? (mu_star.array() + eps * (rng.uniform01() < 0.5 ? 1.0 : -1.0)).matrix().eval()
                   : (mu_star + eps * rng.unit_vector(d)).eval();
        const double tau = rng.uniform(0.2, 1.5);
        const TauBands bands = tau_bands(metric, eps, tau);

        const auto admit = [&](const Eigen::VectorXd& mean) {
            return metric_eval(metric, mean - centroid) < tau;
        };
        const auto place = [&](double radius) {
            return d == 1 ? (mu_star.array() + radius * (rng.uniform01() < 0.5 ? 1.0 : -1.0))
                                .matrix()
                                .eval()
                          : (mu_star + radius * rng.unit_vector(d)).eval();
        };

        const Eigen::VectorXd far =
            place(bands.exclusion_radius * (1.0 + rng.uniform(0.01, 1.0)) + 1e-9);
        ++exclusion_cases;
        if (admit(far)) ++exclusion_violations;

        if (bands.inclusion_radius) {
            const Eigen::VectorXd near = place(*bands.inclusion_radius * rng.uniform(0.0, 0.99));
            ++inclusion_cases;
            if (!admit(near)) ++inclusion_violations;
        }
    }
    {
        auto j = check_entry("band_safe_exclusion", exclusion_violations == 0);
        j["trials"] = exclusion_cases;
        j["violations"] = exclusion_violations;
        checks.push_back(j);
        auto ji = check_entry("band_guaranteed_inclusion", inclusion_violations == 0);
        ji["trials"] = inclusion_cases;
        ji["violations"] = inclusion_violations;
        checks.push_back(ji);
    }

    report["checks"] = checks;
    report["passed"] = audit_passed(report);
    return report;
}

namespace {

FlowMap random_flow(int dim, Rng& rng) {
    const int layer_count = 1 + static_cast<int>(rng.uniform_index(4));
    std::vector<LayerSpec> specs;
    for (int l = 0; l < layer_count; ++l) {
        if (dim >= 2 && rng.uniform01() < 0.5) {
            const int pass = 1 + static_cast<int>(rng.uniform_index(
                                     static_cast<std::uint64_t>(dim - 1)));
            const int coupled = dim - pass;
            AdditiveCouplingLayer layer;
            layer.weights = Eigen::MatrixXd::NullaryExpr(
                coupled, pass, [&]() { return 0.8 * rng.normal(); });
            layer.bias =
                Eigen::VectorXd::NullaryExpr(coupled, [&]() { return 0.5 * rng.normal(); });
            layer.scale = rng.uniform(0.0, 1.5);
            specs.emplace_back(layer);
        } else {
            DiagonalAffineLayer layer;
            layer.scale = Eigen::VectorXd::NullaryExpr(dim, [&]() {
                const double magnitude = rng.uniform(0.1, 2.0);
                return rng.uniform01() < 0.5 ? magnitude : -magnitude;
            });
            layer.shift = Eigen::VectorXd::NullaryExpr(dim, [&]() { return rng.normal(); });
            specs.emplace_back(layer);
        }
    }
    return build_flow(dim, specs);
}

}  // namespace

nlohmann::ordered_json audit_transport(const RunConfig& config) {
    config.validate();
    const std::uint64_t seed0 = config.seeds.front();

    nlohmann::ordered_json report;
    report["schema_version"] = 1;
    report["kind"] = "transport";
    report["config"] = config.to_json();
    auto checks = nlohmann::ordered_json::array();

    long variance_violations = 0, mean_violations = 0;
    double max_roundtrip_error = 0.0;
    for (int i = 0; i < config.flows; ++i) {
        const std::uint64_t flow_seed = derive_seed(seed0, kFlowStream2, static_cast<std::uint64_t>(i));
        Rng rng(flow_seed);
        const int dim = 2 + static_cast<int>(rng.uniform_index(5));
        const FlowMap flow = random_flow(dim, rng);
        const Eigen::VectorXd c_z = 2.0 * rng.normal_vector(dim);

        const TransportReport tr = verify_transport(flow, c_z, config.tau, config.flow_samples,
                                                    derive_seed(flow_seed, 1));
        if (tr.variance_lhs > tr.variance_bound) ++variance_violations;
        if (tr.mean_shift > tr.mean_bound) ++mean_violations;

        for (int p = 0; p < config.roundtrip_probes; ++p) {
            const Eigen::VectorXd z = 1.5 * rng.normal_vector(dim);
            const double err = (flow.inverse(flow.forward(z)) - z).cwiseAbs().maxCoeff();
            max_roundtrip_error = std::max(max_roundtrip_error, err);
        }
    }

    {
        auto j = check_entry("transport_variance_bound", variance_violations == 0);
        j["flows"] = config.flows;
        j["violations"] = variance_violations;
        checks.push_back(j);
        auto jm = check_entry("transport_mean_bound", mean_violations == 0);
        jm["flows"] = config.flows;
        jm["violations"] = mean_violations;
        checks.push_back(jm);
        auto jr = check_entry("roundtrip_invertibility", max_roundtrip_error < 1e-8);
        jr["max_error"] = max_roundtrip_error;
        checks.push_back(jr);
    }

    report["checks"] = checks;
    report["passed"] = audit_passed(report);
    return report;
}

bool audit_passed(const nlohmann::ordered_json& report) {
    for (const auto& check : report.at("checks")) {
        if (!check.at("passed").get<bool>()) return false;
    }
    return true;
}

}  // namespace poolmatch
