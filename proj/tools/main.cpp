// poolmatch CLI: seeded synthetic experiments comparing pooling strategies,
// property/transport audits, and the data-addition score.
//
// Subcommands:
//   simulate <asymptotic|symmetric|addition>   run a regime, emit CSV/JSON
//   audit    <properties|transport>            run an audit, emit JSON report
//   da-score <y1,y2,y3,y4,y5>                  score a performance sequence
//
// Precedence: regime defaults < --config document < command-line flags.
// Failures print a machine-readable error object to stderr and exit nonzero.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "poolmatch/evaluation.hpp"
#include "poolmatch/harness.hpp"

namespace {

using poolmatch::ConfigError;
using poolmatch::RunConfig;

std::vector<double> parse_csv_doubles(const std::string& text, const char* field,
                                      std::size_t expected) {
    std::vector<double> values;
    std::stringstream ss(text);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
        try {
            values.push_back(std::stod(cell));
        } catch (const std::exception&) {
            throw ConfigError(field, "'" + cell + "' is not a number");
        }
    }
    if (expected != 0 && values.size() != expected) {
        throw ConfigError(field, "expected exactly " + std::to_string(expected) + " values");
    }
    return values;
}

struct CommonFlags {
    std::string config_path;
    std::string seed_list;
    std::string out;
    std::string format;
    std::string timing;
};

void add_common(CLI::App* cmd, CommonFlags& flags) {
    cmd->add_option("--config", flags.config_path, "JSON config document");
    cmd->add_option("--seed-list", flags.seed_list, "comma-separated seeds (overrides config)");
    cmd->add_option("--out", flags.out, "output path");
    cmd->add_option("--format", flags.format, "csv or json")
        ->check(CLI::IsMember({"csv", "json"}));
    cmd->add_option("--timing", flags.timing,
                    "runtime_ms column: zero (byte-stable, default) or measured")
        ->check(CLI::IsMember({"zero", "measured"}));
}

// Defaults for the regime, overlaid with the config document, overlaid with
// command-line overrides, resolved in a single pass.
RunConfig load_config(poolmatch::Regime regime, const CommonFlags& flags,
                      const nlohmann::json& overrides = nlohmann::json::object()) {
    nlohmann::json doc = nlohmann::json::object();
    if (!flags.config_path.empty()) {
        std::ifstream in(flags.config_path);
        if (!in) throw ConfigError("config", "cannot open " + flags.config_path);
        try {
            in >> doc;
        } catch (const nlohmann::json::parse_error& e) {
            throw ConfigError("config", std::string("parse error: ") + e.what());
        }
        if (doc.contains("regime")) {
            // The subcommand fixes the regime; a conflicting document is an error.
            const auto named = doc.at("regime").get<std::string>();
            if (named != poolmatch::regime_name(regime))
                throw ConfigError("regime", "config names regime '" + named +
                                                "' but the command selected '" +
                                                poolmatch::regime_name(regime) + "'");
            doc.erase("regime");
        }
    }
    for (const auto& [key, value] : overrides.items()) doc[key] = value;

    RunConfig config = RunConfig::defaults_for(regime);
    config.apply_json(doc);
    if (!flags.seed_list.empty()) {
        config.seeds.clear();
        for (const double s : parse_csv_doubles(flags.seed_list, "seed-list", 0))
            config.seeds.push_back(static_cast<std::uint64_t>(s));
    }
    if (!flags.out.empty()) config.out = flags.out;
    if (!flags.format.empty()) config.format = flags.format;
    if (!flags.timing.empty()) config.measured_timing = flags.timing == "measured";
    return config;
}

void print_error(const std::exception& e) {
    nlohmann::ordered_json err;
    err["error"]["message"] = e.what();
    if (const auto* ce = dynamic_cast<const ConfigError*>(&e)) err["error"]["field"] = ce->field();
    std::cerr << err.dump() << std::endl;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"pooling-strategy simulation harness"};
    app.require_subcommand(1);

    // simulate
    auto* simulate = app.add_subcommand("simulate", "run one synthetic regime");
    std::string regime_arg;
    simulate->add_option("regime", regime_arg, "asymptotic, symmetric, or addition")
        ->required()
        ->check(CLI::IsMember({"asymptotic", "symmetric", "addition"}));
    CommonFlags sim_flags;
    add_common(simulate, sim_flags);
    std::optional<double> opt_tau, opt_sigma, opt_tol;
    std::optional<int> opt_n, opt_d, opt_K, opt_sub_m, opt_sub_n;
    std::string k_grid_arg;
    simulate->add_option("--tau", opt_tau, "matching radius");
    simulate->add_option("--sigma", opt_sigma, "within-domain std");
    simulate->add_option("--tol", opt_tol, "matching convergence tolerance");
    simulate->add_option("--n", opt_n, "samples per domain");
    simulate->add_option("--d", opt_d, "dimension");
    simulate->add_option("--k", opt_K, "domain count (symmetric regime)");
    simulate->add_option("--k-grid", k_grid_arg, "comma-separated K grid (asymptotic regime)");
    simulate->add_option("--subsample-m", opt_sub_m, "domains per subsample draw");
    simulate->add_option("--subsample-n", opt_sub_n, "samples per subsampled domain");

    // audit
    auto* audit = app.add_subcommand("audit", "run a property or transport audit");
    std::string audit_arg;
    audit->add_option("which", audit_arg, "properties or transport")
        ->required()
        ->check(CLI::IsMember({"properties", "transport"}));
    CommonFlags audit_flags;
    add_common(audit, audit_flags);

    // da-score
    auto* da = app.add_subcommand("da-score", "data-addition score of five values");
    std::string y_arg, weights_arg;
    da->add_option("y", y_arg, "comma-separated 5-tuple y1,..,y5")->required();
    da->add_option("--weights", weights_arg, "comma-separated 4 importance weights");

    CLI11_PARSE(app, argc, argv);

    try {
        if (simulate->parsed()) {
            nlohmann::json overrides = nlohmann::json::object();
            if (opt_tau) overrides["tau"] = *opt_tau;
            if (opt_sigma) overrides["sigma"] = *opt_sigma;
            if (opt_tol) overrides["tol"] = *opt_tol;
            if (opt_n) overrides["n"] = *opt_n;
            if (opt_d) overrides["d"] = *opt_d;
            if (opt_K) overrides["K"] = *opt_K;
            if (!k_grid_arg.empty()) {
                std::vector<int> grid;
                for (const double k : parse_csv_doubles(k_grid_arg, "k-grid", 0))
                    grid.push_back(static_cast<int>(k));
                overrides["k_grid"] = grid;
            }
            if (opt_sub_m) overrides["subsample_m"] = *opt_sub_m;
            if (opt_sub_n) overrides["subsample_n"] = *opt_sub_n;
            RunConfig config =
                load_config(poolmatch::regime_from_name(regime_arg), sim_flags, overrides);
            if (config.out.empty())
                config.out = std::string(poolmatch::regime_name(config.regime)) + "." +
                             config.format;

            const poolmatch::ResultTable table = poolmatch::run_regime(config);
            poolmatch::emit(table, config.format, config.out);

            std::cout << "wrote " << table.rows.size() << " rows to " << config.out << '\n';
            for (const auto& s : table.summary) {
                std::printf("%-10s final epsilon %.6f +/- %.6f\n", s.strategy.c_str(),
                            s.mean_final_epsilon, s.std_final_epsilon);
            }
            return 0;
        }

        if (audit->parsed()) {
            const auto regime = poolmatch::regime_from_name(audit_arg);
            RunConfig config = load_config(regime, audit_flags);
            const nlohmann::ordered_json report = regime == poolmatch::Regime::properties
                                                      ? poolmatch::audit_properties(config)
                                                      : poolmatch::audit_transport(config);
            if (!config.out.empty()) {
                std::ofstream out(config.out, std::ios::trunc);
                if (!out) throw std::runtime_error("cannot write " + config.out);
                out << report.dump(2) << '\n';
            }
            std::cout << report.dump(2) << std::endl;
            return poolmatch::audit_passed(report) ? 0 : 2;
        }

        if (da->parsed()) {
            poolmatch::DaInput input;
            const auto y = parse_csv_doubles(y_arg, "y", 5);
            std::copy(y.begin(), y.end(), input.y.begin());
            if (!weights_arg.empty()) {
                const auto s = parse_csv_doubles(weights_arg, "weights", 4);
                std::copy(s.begin(), s.end(), input.s.begin());
            }
            std::printf("%.12g\n", poolmatch::da_score(input));
            return 0;
        }
    } catch (const std::exception& e) {
        print_error(e);
        return 1;
    }
    return 0;
}
