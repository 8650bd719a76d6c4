#include "poolmatch/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <set>

#include "poolmatch/evaluation.hpp"
#include "poolmatch/flow.hpp"
#include "poolmatch/rng.hpp"

namespace poolmatch {

namespace {

constexpr std::uint64_t kSubsampleStream = 0x737562ULL;

std::string fmt_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

double elapsed_ms(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start)
        .count();
}

// --- json field access with structured errors ---------------------------

double as_double(const nlohmann::json& j, const std::string& field) {
    if (!j.is_number()) throw ConfigError(field, "expected a number");
    return j.get<double>();
}

int as_int(const nlohmann::json& j, const std::string& field) {
    if (!j.is_number_integer()) throw ConfigError(field, "expected an integer");
    return j.get<int>();
}

std::string as_string(const nlohmann::json& j, const std::string& field) {
    if (!j.is_string()) throw ConfigError(field, "expected a string");
    return j.get<std::string>();
}

Eigen::VectorXd as_vector(const nlohmann::json& j, const std::string& field) {
    if (!j.is_array() || j.empty()) throw ConfigError(field, "expected a nonempty array");
    Eigen::VectorXd v(j.size());
    for (std::size_t i = 0; i < j.size(); ++i) v[static_cast<int>(i)] = as_double(j[i], field);
    return v;
}

const nlohmann::json& require_key(const nlohmann::json& j, const char* key,
                                  const std::string& field) {
    if (!j.contains(key)) throw ConfigError(field, "required field is missing");
    return j.at(key);
}

// --- metric / meta (de)serialization -------------------------------------

nlohmann::ordered_json metric_to_json(const MetricSpec& m) {
    nlohmann::ordered_json j;
    j["kind"] = m.kind_name();
    if (m.kind == MetricKind::scaled) j["factor"] = m.scale;
    j["m"] = m.m;
    j["L"] = m.L;
    return j;
}

MetricSpec metric_from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw ConfigError("metric", "expected an object");
    const std::string kind = as_string(require_key(j, "kind", "metric.kind"), "metric.kind");
    if (kind == "euclidean") return MetricSpec::Euclidean();
    if (kind == "scaled") {
        if (!j.contains("factor")) throw ConfigError("metric.factor", "required for scaled metric");
        return MetricSpec::Scaled(as_double(j.at("factor"), "metric.factor"));
    }
    if (kind == "geodesic_chord") return MetricSpec::GeodesicChord();
    throw ConfigError("metric.kind", "unknown metric kind '" + kind + "'");
}

nlohmann::ordered_json meta_to_json(const MetaSpec& m) {
    nlohmann::ordered_json j;
    j["kind"] = m.kind_name();
    switch (m.kind) {
        case MetaKind::symmetric:
            j["gamma"] = m.gamma;
            break;
        case MetaKind::asymmetric: {
            j["alpha"] = m.alpha;
            std::vector<double> dir(m.direction.data(), m.direction.data() + m.direction.size());
            j["direction"] = dir;
            break;
        }
        case MetaKind::two_point: {
            std::vector<double> off(m.offset.data(), m.offset.data() + m.offset.size());
            j["offset"] = off;
            j["prob"] = m.prob;
            break;
        }
        case MetaKind::outlier_sequence:
            j["base"] = meta_to_json(*m.base);
            j["outlier_distance"] = m.outlier_distance;
            j["every"] = m.every;
            break;
    }
    return j;
}

MetaSpec meta_from_json(const nlohmann::json& j, const Eigen::VectorXd& mu_star) {
    if (!j.is_object()) throw ConfigError("meta", "expected an object");
    const std::string kind = as_string(require_key(j, "kind", "meta.kind"), "meta.kind");
    if (kind == "symmetric") {
        return MetaSpec::Symmetric(mu_star, as_double(require_key(j, "gamma", "meta.gamma"), "meta.gamma"));
    }
    if (kind == "asymmetric") {
        Eigen::VectorXd dir = Eigen::VectorXd::Zero(mu_star.size());
        dir[0] = 1.0;
        if (j.contains("direction")) dir = as_vector(j.at("direction"), "meta.direction");
        return MetaSpec::Asymmetric(mu_star, as_double(require_key(j, "alpha", "meta.alpha"), "meta.alpha"), dir);
    }
    if (kind == "two_point") {
        return MetaSpec::TwoPoint(mu_star, as_vector(require_key(j, "offset", "meta.offset"), "meta.offset"),
                                  as_double(require_key(j, "prob", "meta.prob"), "meta.prob"));
    }
    if (kind == "outlier_sequence") {
        MetaSpec base = meta_from_json(require_key(j, "base", "meta.base"), mu_star);
        return MetaSpec::OutlierSequence(std::move(base),
                                         as_double(require_key(j, "outlier_distance", "meta.outlier_distance"), "meta.outlier_distance"),
                                         as_int(require_key(j, "every", "meta.every"), "meta.every"));
    }
    throw ConfigError("meta.kind", "unknown meta kind '" + kind + "'");
}

MetaSpec default_meta(Regime regime, const Eigen::VectorXd& mu_star) {
    switch (regime) {
        case Regime::symmetric:
            return MetaSpec::Symmetric(mu_star, 1.5);
        case Regime::addition:
            return MetaSpec::OutlierSequence(MetaSpec::Symmetric(mu_star, 0.5), 2.5, 3);
        case Regime::asymptotic:
        case Regime::properties:
        case Regime::transport: {
            Eigen::VectorXd dir = Eigen::VectorXd::Zero(mu_star.size());
            dir[0] = 1.0;
            return MetaSpec::Asymmetric(mu_star, 1.5, dir);
        }
    }
    throw std::logic_error("default_meta: unhandled regime");
}

const char* init_name(CentroidInit init) {
    switch (init) {
        case CentroidInit::median: return "median";
        case CentroidInit::target_oracle: return "target_oracle";
        case CentroidInit::zero: return "zero";
    }
    return "unknown";
}

CentroidInit init_from_name(const std::string& name) {
    if (name == "median") return CentroidInit::median;
    if (name == "target_oracle") return CentroidInit::target_oracle;
    if (name == "zero") return CentroidInit::zero;
    throw ConfigError("init", "unknown centroid init '" + name + "'");
}

}  // namespace

const char* regime_name(Regime r) {
    switch (r) {
        case Regime::asymptotic: return "asymptotic";
        case Regime::symmetric: return "symmetric";
        case Regime::addition: return "addition";
        case Regime::properties: return "properties";
        case Regime::transport: return "transport";
    }
    return "unknown";
}

Regime regime_from_name(const std::string& name) {
    if (name == "asymptotic") return Regime::asymptotic;
    if (name == "symmetric") return Regime::symmetric;
    if (name == "addition") return Regime::addition;
    if (name == "properties") return Regime::properties;
    if (name == "transport") return Regime::transport;
    throw ConfigError("regime", "unknown regime '" + name + "'");
}

RunConfig RunConfig::defaults_for(Regime regime) {
    RunConfig c;
    c.regime = regime;
    c.mu_star = Eigen::VectorXd::Zero(c.d);
    switch (regime) {
        case Regime::asymptotic:
            c.n = 150;
            c.tau = 1.2;
            break;
        case Regime::symmetric:
            c.K = 15;
            c.n = 100;
            c.tau = 1.0;
            break;
        case Regime::addition:
            c.n = 100;
            c.tau = 1.1;
            break;
        case Regime::properties:
            c.tau = 1.0;
            break;
        case Regime::transport:
            c.tau = 1.0;
            break;
    }
    c.meta = default_meta(regime, c.mu_star);
    return c;
}

void RunConfig::apply_json(const nlohmann::json& doc) {
    if (!doc.is_object()) throw ConfigError("config", "expected a JSON object");

    static const std::set<std::string> known{
        "regime", "d", "sigma", "mu_star", "k_grid", "K", "k_start", "k_end",
        "n", "tau", "metric", "meta", "init", "tol", "max_iter",
        "subsample_m", "subsample_n", "seeds", "out", "format", "timing",
        "cloud_n", "taus", "trial_count", "band_trials",
        "flows", "flow_samples", "roundtrip_probes"};
    for (const auto& [key, value] : doc.items()) {
        (void)value;
        if (!known.count(key)) throw ConfigError(key, "unknown config field");
    }

    if (doc.contains("d")) {
        d = as_int(doc.at("d"), "d");
        if (d < 1) throw ConfigError("d", "must be >= 1");
        mu_star = Eigen::VectorXd::Zero(d);
    }
    if (doc.contains("mu_star")) {
        mu_star = as_vector(doc.at("mu_star"), "mu_star");
        d = static_cast<int>(mu_star.size());
    }

    if (doc.contains("sigma")) sigma = as_double(doc.at("sigma"), "sigma");
    if (doc.contains("k_grid")) {
        k_grid.clear();
        if (!doc.at("k_grid").is_array() || doc.at("k_grid").empty())
            throw ConfigError("k_grid", "expected a nonempty array");
        for (const auto& v : doc.at("k_grid")) k_grid.push_back(as_int(v, "k_grid"));
    }
    if (doc.contains("K")) K = as_int(doc.at("K"), "K");
    if (doc.contains("k_start")) k_start = as_int(doc.at("k_start"), "k_start");
    if (doc.contains("k_end")) k_end = as_int(doc.at("k_end"), "k_end");
    if (doc.contains("n")) n = as_int(doc.at("n"), "n");
    if (doc.contains("tau")) tau = as_double(doc.at("tau"), "tau");
    if (doc.contains("metric")) metric = metric_from_json(doc.at("metric"));
    if (doc.contains("init")) init = init_from_name(as_string(doc.at("init"), "init"));
    if (doc.contains("tol")) tol = as_double(doc.at("tol"), "tol");
    if (doc.contains("max_iter")) max_iter = as_int(doc.at("max_iter"), "max_iter");
    if (doc.contains("subsample_m")) subsample_m = as_int(doc.at("subsample_m"), "subsample_m");
    if (doc.contains("subsample_n")) subsample_n = as_int(doc.at("subsample_n"), "subsample_n");
    if (doc.contains("seeds")) {
        seeds.clear();
        if (!doc.at("seeds").is_array() || doc.at("seeds").empty())
            throw ConfigError("seeds", "expected a nonempty array");
        for (const auto& v : doc.at("seeds"))
            seeds.push_back(static_cast<std::uint64_t>(as_int(v, "seeds")));
    }
    if (doc.contains("out")) out = as_string(doc.at("out"), "out");
    if (doc.contains("format")) {
        format = as_string(doc.at("format"), "format");
        if (format != "csv" && format != "json")
            throw ConfigError("format", "must be 'csv' or 'json'");
    }
    if (doc.contains("timing")) {
        const std::string timing = as_string(doc.at("timing"), "timing");
        if (timing == "zero") measured_timing = false;
        else if (timing == "measured") measured_timing = true;
        else throw ConfigError("timing", "must be 'zero' or 'measured'");
    }
    if (doc.contains("cloud_n")) cloud_n = as_int(doc.at("cloud_n"), "cloud_n");
    if (doc.contains("taus")) {
        taus.clear();
        for (const auto& v : doc.at("taus")) taus.push_back(as_double(v, "taus"));
    }
    if (doc.contains("trial_count")) trial_count = as_int(doc.at("trial_count"), "trial_count");
    if (doc.contains("band_trials")) band_trials = as_int(doc.at("band_trials"), "band_trials");
    if (doc.contains("flows")) flows = as_int(doc.at("flows"), "flows");
    if (doc.contains("flow_samples")) flow_samples = as_int(doc.at("flow_samples"), "flow_samples");
    if (doc.contains("roundtrip_probes"))
        roundtrip_probes = as_int(doc.at("roundtrip_probes"), "roundtrip_probes");

    // The generator is tied to the target geometry: an explicit meta is
    // parsed against the resolved mu_star, and changing d or mu_star without
    // one resets the generator to the regime default at the new target.
    if (doc.contains("meta")) {
        meta = meta_from_json(doc.at("meta"), mu_star);
    } else if (doc.contains("d") || doc.contains("mu_star") || meta.dim() != d) {
        meta = default_meta(regime, mu_star);
    }
}

RunConfig RunConfig::from_json(const nlohmann::json& doc) {
    if (!doc.is_object()) throw ConfigError("config", "expected a JSON object");
    Regime regime = Regime::asymptotic;
    if (doc.contains("regime")) regime = regime_from_name(as_string(doc.at("regime"), "regime"));
    RunConfig config = defaults_for(regime);
    config.apply_json(doc);
    return config;
}

nlohmann::ordered_json RunConfig::to_json() const {
    nlohmann::ordered_json j;
    j["regime"] = regime_name(regime);
    j["d"] = d;
    j["sigma"] = sigma;
    j["mu_star"] = std::vector<double>(mu_star.data(), mu_star.data() + mu_star.size());
    j["k_grid"] = k_grid;
    j["K"] = K;
    j["k_start"] = k_start;
    j["k_end"] = k_end;
    j["n"] = n;
    j["tau"] = tau;
    j["metric"] = metric_to_json(metric);
    j["meta"] = meta_to_json(meta);
    j["init"] = init_name(init);
    j["tol"] = tol;
    j["max_iter"] = max_iter;
    j["subsample_m"] = subsample_m;
    j["subsample_n"] = subsample_n;
    j["seeds"] = seeds;
    j["out"] = out;
    j["format"] = format;
    j["timing"] = measured_timing ? "measured" : "zero";
    j["cloud_n"] = cloud_n;
    j["taus"] = taus;
    j["trial_count"] = trial_count;
    j["band_trials"] = band_trials;
    j["flows"] = flows;
    j["flow_samples"] = flow_samples;
    j["roundtrip_probes"] = roundtrip_probes;
    return j;
}

int RunConfig::resolved_subsample_m(int k) const {
    const int m = subsample_m > 0 ? subsample_m : (k + 1) / 2;
    return std::min(m, k);
}

int RunConfig::resolved_subsample_n() const {
    return subsample_n > 0 ? subsample_n : (n + 9) / 10;
}

void RunConfig::validate() const {
    if (d < 1) throw ConfigError("d", "must be >= 1");
    if (sigma < 0.0) throw ConfigError("sigma", "must be >= 0");
    if (!(tau > 0.0)) throw ConfigError("tau", "must be > 0");
    if (n < 1) throw ConfigError("n", "must be >= 1");
    if (!(tol > 0.0)) throw ConfigError("tol", "must be > 0");
    if (max_iter < 1) throw ConfigError("max_iter", "must be >= 1");
    if (seeds.empty()) throw ConfigError("seeds", "must be nonempty");
    if (mu_star.size() != d) throw ConfigError("mu_star", "dimension differs from d");
    if (meta.dim() != d) throw ConfigError("meta", "dimension differs from d");
    switch (regime) {
        case Regime::asymptotic:
            if (k_grid.empty()) throw ConfigError("k_grid", "must be nonempty");
            for (const int k : k_grid)
                if (k < 1) throw ConfigError("k_grid", "entries must be >= 1");
            break;
        case Regime::symmetric:
            if (K < 1) throw ConfigError("K", "must be >= 1");
            break;
        case Regime::addition:
            if (k_start < 1) throw ConfigError("k_start", "must be >= 1");
            if (k_end < k_start) throw ConfigError("k_end", "must be >= k_start");
            break;
        case Regime::properties:
            if (cloud_n < 2) throw ConfigError("cloud_n", "must be >= 2");
            if (!std::is_sorted(taus.begin(), taus.end()))
                throw ConfigError("taus", "must be sorted ascending");
            break;
        case Regime::transport:
            if (flows < 1) throw ConfigError("flows", "must be >= 1");
            if (flow_samples < 2) throw ConfigError("flow_samples", "must be >= 2");
            break;
    }
}

namespace {

struct StrategyTrack {
    Strategy strategy;
    double previous_epsilon = 0.0;
    bool has_previous = false;
};

ResultRow make_row(const RunConfig& config, std::uint64_t seed, int k, Strategy strategy,
                   double epsilon, StrategyTrack& track, long set_size, bool admitted,
                   double runtime_ms) {
    ResultRow row;
    row.regime = regime_name(config.regime);
    row.seed = seed;
    row.K = k;
    row.strategy = strategy_name(strategy);
    row.epsilon = epsilon;
    row.delta_epsilon = track.has_previous ? epsilon - track.previous_epsilon : 0.0;
    track.previous_epsilon = epsilon;
    track.has_previous = true;
    row.set_size = set_size;
    row.admitted = admitted;
    row.runtime_ms = config.measured_timing ? runtime_ms : 0.0;
    return row;
}

MatchOptions match_options(const RunConfig& config) {
    MatchOptions options;
    options.tau = config.tau;
    options.metric = config.metric;
    options.init = config.init;
    options.tol = config.tol;
    options.max_iter = config.max_iter;
    if (config.init == CentroidInit::target_oracle) options.oracle_target = config.mu_star;
    return options;
}

// Independent evaluation of all three strategies on the first K domains.
void run_grid_point(const RunConfig& config, std::uint64_t seed, int k,
                    const std::vector<Domain>& all_domains,
                    std::vector<StrategyTrack>& tracks, std::vector<ResultRow>& rows) {
    const std::vector<Domain> domains(all_domains.begin(), all_domains.begin() + k);

    auto t0 = std::chrono::steady_clock::now();
    const PooledResult pooled = naive_pool(domains);
    rows.push_back(make_row(config, seed, k, Strategy::naive,
                            error_norm(pooled.mean_estimate, config.mu_star), tracks[0],
                            static_cast<long>(pooled.included_domains.size()), true,
                            elapsed_ms(t0)));

    t0 = std::chrono::steady_clock::now();
    const PooledResult sub =
        uniform_subsample(domains, config.resolved_subsample_m(k), config.resolved_subsample_n(),
                          derive_seed(seed, kSubsampleStream, static_cast<std::uint64_t>(k)));
    rows.push_back(make_row(config, seed, k, Strategy::subsample,
                            error_norm(sub.mean_estimate, config.mu_star), tracks[1],
                            static_cast<long>(sub.included_domains.size()), true,
                            elapsed_ms(t0)));

    t0 = std::chrono::steady_clock::now();
    const MatchOutcome match = match_domains(domains, match_options(config));
    rows.push_back(make_row(config, seed, k, Strategy::matching,
                            error_norm(match.state.centroid, config.mu_star), tracks[2],
                            static_cast<long>(match.state.matched.size()), true,
                            elapsed_ms(t0)));
}

void run_addition_seed(const RunConfig& config, std::uint64_t seed,
                       std::vector<ResultRow>& rows) {
    const auto domains =
        sample_domains(config.meta, config.k_end, config.sigma, config.n, seed);
    std::vector<StrategyTrack> tracks{{Strategy::naive}, {Strategy::subsample},
                                      {Strategy::matching}};

    const std::vector<Domain> initial(domains.begin(), domains.begin() + config.k_start);

    auto t0 = std::chrono::steady_clock::now();
    PooledResult naive = naive_pool(initial);
    rows.push_back(make_row(config, seed, config.k_start, Strategy::naive,
                            error_norm(naive.mean_estimate, config.mu_star), tracks[0],
                            static_cast<long>(naive.included_domains.size()), true,
                            elapsed_ms(t0)));

    t0 = std::chrono::steady_clock::now();
    const PooledResult sub0 = uniform_subsample(
        initial, config.resolved_subsample_m(config.k_start), config.resolved_subsample_n(),
        derive_seed(seed, kSubsampleStream, static_cast<std::uint64_t>(config.k_start)));
    rows.push_back(make_row(config, seed, config.k_start, Strategy::subsample,
                            error_norm(sub0.mean_estimate, config.mu_star), tracks[1],
                            static_cast<long>(sub0.included_domains.size()), true,
                            elapsed_ms(t0)));

    t0 = std::chrono::steady_clock::now();
    MatchOutcome match = match_domains(initial, match_options(config));
    rows.push_back(make_row(config, seed, config.k_start, Strategy::matching,
                            error_norm(match.state.centroid, config.mu_star), tracks[2],
                            static_cast<long>(match.state.matched.size()), true,
                            elapsed_ms(t0)));

    for (int k = config.k_start + 1; k <= config.k_end; ++k) {
        const Domain& next = domains[static_cast<std::size_t>(k - 1)];

        t0 = std::chrono::steady_clock::now();
        const AddStepResult naive_step = add_domain_step_naive(naive, next, config.mu_star);
        rows.push_back(make_row(config, seed, k, Strategy::naive, naive_step.epsilon, tracks[0],
                                static_cast<long>(naive.included_domains.size()), true,
                                elapsed_ms(t0)));

        // Subsampling carries no state across steps: each K is a fresh draw.
        t0 = std::chrono::steady_clock::now();
        const std::vector<Domain> prefix(domains.begin(), domains.begin() + k);
        const PooledResult sub = uniform_subsample(
            prefix, config.resolved_subsample_m(k), config.resolved_subsample_n(),
            derive_seed(seed, kSubsampleStream, static_cast<std::uint64_t>(k)));
        rows.push_back(make_row(config, seed, k, Strategy::subsample,
                                error_norm(sub.mean_estimate, config.mu_star), tracks[1],
                                static_cast<long>(sub.included_domains.size()), true,
                                elapsed_ms(t0)));

        t0 = std::chrono::steady_clock::now();
        const AddStepResult match_step =
            add_domain_step_matching(match.state, next, config.mu_star);
        rows.push_back(make_row(config, seed, k, Strategy::matching, match_step.epsilon,
                                tracks[2], static_cast<long>(match.state.matched.size()),
                                match_step.admitted, elapsed_ms(t0)));
    }
}

std::vector<StrategySummary> summarize(const std::vector<ResultRow>& rows, int final_k) {
    std::vector<StrategySummary> summary;
    for (const auto* name : {"naive", "subsample", "matching"}) {
        std::vector<double> finals;
        for (const auto& row : rows)
            if (row.K == final_k && row.strategy == name) finals.push_back(row.epsilon);
        if (finals.empty()) continue;
        StrategySummary s;
        s.strategy = name;
        double mean = 0.0;
        for (const double v : finals) mean += v;
        mean /= static_cast<double>(finals.size());
        double var = 0.0;
        for (const double v : finals) var += (v - mean) * (v - mean);
        s.mean_final_epsilon = mean;
        s.std_final_epsilon =
            finals.size() > 1 ? std::sqrt(var / static_cast<double>(finals.size() - 1)) : 0.0;
        summary.push_back(s);
    }
    return summary;
}

}  // namespace

ResultTable run_regime(const RunConfig& config) {
    config.validate();
    ResultTable table;
    table.config = config;

    int final_k = 0;
    switch (config.regime) {
        case Regime::asymptotic: {
            auto grid = config.k_grid;
            std::sort(grid.begin(), grid.end());
            final_k = grid.back();
            for (const auto seed : config.seeds) {
                const auto domains =
                    sample_domains(config.meta, grid.back(), config.sigma, config.n, seed);
                std::vector<StrategyTrack> tracks{{Strategy::naive}, {Strategy::subsample},
                                                  {Strategy::matching}};
                for (const int k : grid)
                    run_grid_point(config, seed, k, domains, tracks, table.rows);
            }
            break;
        }
        case Regime::symmetric: {
            final_k = config.K;
            for (const auto seed : config.seeds) {
                const auto domains =
                    sample_domains(config.meta, config.K, config.sigma, config.n, seed);
                std::vector<StrategyTrack> tracks{{Strategy::naive}, {Strategy::subsample},
                                                  {Strategy::matching}};
                run_grid_point(config, seed, config.K, domains, tracks, table.rows);
            }
            break;
        }
        case Regime::addition: {
            final_k = config.k_end;
            for (const auto seed : config.seeds) run_addition_seed(config, seed, table.rows);
            break;
        }
        case Regime::properties:
        case Regime::transport:
            throw ConfigError("regime", std::string(regime_name(config.regime)) +
                                            " produces an audit report; run audit_properties / "
                                            "audit_transport (CLI: 'audit')");
    }

    // Canonical row order: seed, then K, then strategy in the fixed order the
    // rows were produced in (naive, subsample, matching).
    std::stable_sort(table.rows.begin(), table.rows.end(),
                     [](const ResultRow& a, const ResultRow& b) {
                         if (a.seed != b.seed) return a.seed < b.seed;
                         return a.K < b.K;
                     });
    table.summary = summarize(table.rows, final_k);
    return table;
}

const char* const kCsvHeader =
    "regime,seed,K,strategy,epsilon,delta_epsilon,set_size,admitted,runtime_ms";

void emit_csv(const ResultTable& table, std::ostream& out) {
    out << kCsvHeader << '\n';
    for (const auto& row : table.rows) {
        out << row.regime << ',' << row.seed << ',' << row.K << ',' << row.strategy << ','
            << fmt_double(row.epsilon) << ',' << fmt_double(row.delta_epsilon) << ','
            << row.set_size << ',' << (row.admitted ? 1 : 0) << ','
            << fmt_double(row.runtime_ms) << '\n';
    }
}

namespace {

nlohmann::ordered_json summary_to_json(const std::vector<StrategySummary>& summary) {
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    for (const auto& s : summary) {
        nlohmann::ordered_json j;
        j["strategy"] = s.strategy;
        j["mean_final_epsilon"] = s.mean_final_epsilon;
        j["std_final_epsilon"] = s.std_final_epsilon;
        arr.push_back(j);
    }
    return arr;
}

}  // namespace

void emit_json(const ResultTable& table, std::ostream& out) {
    nlohmann::ordered_json root;
    root["schema_version"] = 1;
    root["config"] = table.config.to_json();
    root["summary"] = summary_to_json(table.summary);
    nlohmann::ordered_json rows = nlohmann::ordered_json::array();
    for (const auto& row : table.rows) {
        nlohmann::ordered_json j;
        j["regime"] = row.regime;
        j["seed"] = row.seed;
        j["K"] = row.K;
        j["strategy"] = row.strategy;
        j["epsilon"] = row.epsilon;
        j["delta_epsilon"] = row.delta_epsilon;
        j["set_size"] = row.set_size;
        j["admitted"] = row.admitted;
        j["runtime_ms"] = row.runtime_ms;
        rows.push_back(j);
    }
    root["rows"] = rows;
    out << root.dump(2) << '\n';
}

void emit(const ResultTable& table, const std::string& format, const std::string& path) {
    if (table.rows.empty()) throw std::runtime_error("emit: empty result table");
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw std::runtime_error("emit: cannot write " + path);
    if (format == "csv") {
        emit_csv(table, out);
        // Resolved-config echo rides in a sidecar so the CSV stays exactly
        // header + rows.
        std::ofstream meta(path + ".meta.json", std::ios::trunc);
        if (!meta) throw std::runtime_error("emit: cannot write " + path + ".meta.json");
        nlohmann::ordered_json side;
        side["schema_version"] = 1;
        side["config"] = table.config.to_json();
        side["summary"] = summary_to_json(table.summary);
        meta << side.dump(2) << '\n';
    } else if (format == "json") {
        emit_json(table, out);
    } else {
        throw ConfigError("format", "must be 'csv' or 'json'");
    }
}

}  // namespace poolmatch