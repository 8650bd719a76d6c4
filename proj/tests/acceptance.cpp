// Acceptance suite: runs every acceptance criterion at its stated tolerance
// and prints one PASS/FAIL line per criterion.  Exit code = number of
// failures.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <map>
#include <random>
#include <vector>

#include "poolmatch/evaluation.hpp"
#include "poolmatch/flow.hpp"
#include "poolmatch/harness.hpp"
#include "poolmatch/rng.hpp"
#include "poolmatch/sphere.hpp"

using namespace poolmatch;

namespace {

int failures = 0;

void report(int criterion, bool passed, const std::string& label, const std::string& detail) {
    std::printf("[%s] criterion %2d: %-28s %s\n", passed ? "PASS" : "FAIL", criterion,
                label.c_str(), detail.c_str());
    if (!passed) ++failures;
}

double mean_of(const std::vector<double>& v) {
    double m = 0.0;
    for (const double x : v) m += x;
    return m / static_cast<double>(v.size());
}

double sample_var(const std::vector<double>& v) {
    const double m = mean_of(v);
    double acc = 0.0;
    for (const double x : v) acc += (x - m) * (x - m);
    return acc / static_cast<double>(v.size() - 1);
}

std::map<std::string, std::vector<double>> final_epsilons(const ResultTable& table, int final_k) {
    std::map<std::string, std::vector<double>> out;
    for (const auto& row : table.rows)
        if (row.K == final_k) out[row.strategy].push_back(row.epsilon);
    return out;
}

// ---- 1: asymptotic trend ---------------------------------------------------

void criterion_1() {
    const auto start = std::chrono::steady_clock::now();
    const RunConfig config = RunConfig::defaults_for(Regime::asymptotic);
    const ResultTable table = run_regime(config);
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    auto finals = final_epsilons(table, 50);
    const double m_match = mean_of(finals["matching"]);
    const double m_naive = mean_of(finals["naive"]);
    const double m_sub = mean_of(finals["subsample"]);
    const double pooled_se = std::sqrt(sample_var(finals["naive"]) / 10.0 +
                                       sample_var(finals["matching"]) / 10.0);

    const bool smallest = m_match < m_naive && m_match < m_sub;
    const bool separated = (m_naive - m_match) > pooled_se;
    const bool fast = seconds < 60.0;
    char detail[256];
    std::snprintf(detail, sizeof detail,
                  "eps(match)=%.3f eps(naive)=%.3f eps(sub)=%.3f pooled_se=%.3f runtime=%.1fs",
                  m_match, m_naive, m_sub, pooled_se, seconds);
    report(1, smallest && separated && fast, "asymptotic regime", detail);
}

// ---- 2: covariance limits ----------------------------------------------------

void criterion_2() {
    const int K = 50, n = 150;
    const double sigma = 0.8;
    const Eigen::VectorXd zero2 = Eigen::VectorXd::Zero(2);
    Eigen::VectorXd offset(2);
    offset << 3.0, 0.0;
    const auto spec = MetaSpec::TwoPoint(zero2, offset, 0.3);
    const Eigen::MatrixXd sigma_mu = spec.sigma_mu();

    Eigen::MatrixXd pool_acc = Eigen::MatrixXd::Zero(2, 2);
    Eigen::MatrixXd match_acc = Eigen::MatrixXd::Zero(2, 2);
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const auto domains = sample_domains(spec, K, sigma, n, seed);
        pool_acc += naive_pool(domains).covariance_estimate;
        MatchOptions options;
        options.tau = 1.2;
        match_acc += match_domains(domains, options).pooled.covariance_estimate;
    }
    const double rel_pool =
        covariance_limit_check(pool_acc / 10.0, sigma, sigma_mu, CovarianceLimit::pool_limit);
    const double rel_match = covariance_limit_check(match_acc / 10.0, sigma, sigma_mu,
                                                    CovarianceLimit::match_limit);
    char detail[160];
    std::snprintf(detail, sizeof detail, "pool rel err=%.4f (<0.10)  match rel err=%.4f (<0.15)",
                  rel_pool, rel_match);
    report(2, rel_pool < 0.10 && rel_match < 0.15, "covariance limits", detail);
}

// ---- 3: symmetric regime ------------------------------------------------------

void criterion_3() {
    const auto start = std::chrono::steady_clock::now();
    const RunConfig config = RunConfig::defaults_for(Regime::symmetric);
    const ResultTable table = run_regime(config);
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    const double gamma = config.meta.gamma;
    const double sigma = config.sigma;
    const int K = config.K, n = config.n;
    const int m = config.resolved_subsample_m(K);
    const int n_sub = config.resolved_subsample_n();
    const double d = config.d;

    // Analytic standard error of one seed's estimate.  The meta part enters
    // through the number of domain draws (the samples of one domain share its
    // mean draw), the within-domain part through the sample count:
    //   naive/matching over K domains of n:  sqrt(tr(Sigma_mu)/K + d sigma^2/(K n))
    //   subsampling over m domains of n_sub: sqrt(tr(Sigma_mu)/m + d sigma^2/(m n_sub))
    // Matching admits the tau-ball subset of domains, so its meta variance is
    // the truncated one: for |mu| ~ 2D Gaussian with scale gamma,
    //   E[r^2 | r < tau] = 2 gamma^2 - tau^2 / (exp(tau^2/(2 gamma^2)) - 1),
    // over the expected admitted count E|S| = K (1 - exp(-tau^2/(2 gamma^2))).
    const double tr_meta = d * gamma * gamma;
    const double se_naive = std::sqrt(tr_meta / K + d * sigma * sigma / (K * n));
    const double se_sub = std::sqrt(tr_meta / m + d * sigma * sigma / (m * n_sub));
    const double t2 = config.tau * config.tau / (2.0 * gamma * gamma);
    const double tr_trunc = 2.0 * gamma * gamma - config.tau * config.tau / (std::exp(t2) - 1.0);
    const double expected_set = K * (1.0 - std::exp(-t2));
    const double se_match =
        std::sqrt(tr_trunc / expected_set + d * sigma * sigma / (expected_set * n));

    const auto finals = final_epsilons(table, K);
    const double e_naive = mean_of(finals.at("naive"));
    const double e_sub = mean_of(finals.at("subsample"));
    const double e_match = mean_of(finals.at("matching"));

    const bool ok = e_naive <= 3.0 * se_naive && e_sub <= 3.0 * se_sub &&
                    e_match <= 3.0 * se_match && seconds < 10.0;
    char detail[256];
    std::snprintf(detail, sizeof detail,
                  "naive %.3f<=%.3f sub %.3f<=%.3f match %.3f<=%.3f runtime=%.1fs", e_naive,
                  3.0 * se_naive, e_sub, 3.0 * se_sub, e_match, 3.0 * se_match, seconds);
    report(3, ok, "symmetric regime", detail);
}

// ---- 4: addition regime --------------------------------------------------------

void criterion_4() {
    const RunConfig config = RunConfig::defaults_for(Regime::addition);
    const ResultTable table = run_regime(config);

    // (a) matching beats naive pooling at the final K on >= 9 of 10 seeds
    std::map<std::uint64_t, double> final_naive, final_match;
    for (const auto& row : table.rows) {
        if (row.K != config.k_end) continue;
        if (row.strategy == "naive") final_naive[row.seed] = row.epsilon;
        if (row.strategy == "matching") final_match[row.seed] = row.epsilon;
    }
    int wins = 0;
    for (const auto& [seed, eps] : final_match)
        if (eps < final_naive.at(seed)) ++wins;

    // (b) every rejected step leaves epsilon exactly unchanged
    bool rejections_free = true;
    long rejected_steps = 0;
    for (const auto& row : table.rows) {
        if (row.strategy == "matching" && !row.admitted) {
            ++rejected_steps;
            rejections_free = rejections_free && row.delta_epsilon == 0.0;
        }
    }

    // (c) oracle means (sigma = 0): admitted steps obey the per-step bound
    long admitted_steps = 0, bound_violations = 0;
    for (const auto seed : config.seeds) {
        const auto domains =
            sample_domains(config.meta, config.k_end, 0.0, config.n, seed);
        const std::vector<Domain> initial(domains.begin(), domains.begin() + config.k_start);
        MatchOptions options;
        options.tau = config.tau;
        options.metric = config.metric;
        options.use_true_means = true;
        MatchOutcome out = match_domains(initial, options);
        for (int k = config.k_start + 1; k <= config.k_end; ++k) {
            const std::size_t set_before = out.state.matched.size();
            const Eigen::VectorXd centroid_before = out.state.centroid;
            const AddStepResult step = add_domain_step_matching(
                out.state, domains[static_cast<std::size_t>(k - 1)], config.mu_star, true);
            if (!step.admitted) continue;
            ++admitted_steps;
            const double bound =
                config.tau / (config.metric.m * (static_cast<double>(set_before) + 1.0));
            if ((out.state.centroid - centroid_before).norm() > bound) ++bound_violations;
        }
    }

    const bool ok = wins >= 9 && rejections_free && bound_violations == 0;
    char detail[256];
    std::snprintf(detail, sizeof detail,
                  "wins=%d/10 rejected_steps=%ld (all free) admitted=%ld bound_violations=%ld",
                  wins, rejected_steps, admitted_steps, bound_violations);
    report(4, ok, "addition regime", detail);
}

// ---- 5: admission bands ----------------------------------------------------------

void criterion_5() {
    RunConfig config = RunConfig::defaults_for(Regime::properties);
    config.band_trials = 10000;
    const auto reportJson = audit_properties(config);
    long excl_viol = -1, incl_viol = -1, excl_trials = 0, incl_trials = 0;
    for (const auto& check : reportJson.at("checks")) {
        if (check.at("name") == "band_safe_exclusion") {
            excl_viol = check.at("violations").get<long>();
            excl_trials = check.at("trials").get<long>();
        }
        if (check.at("name") == "band_guaranteed_inclusion") {
            incl_viol = check.at("violations").get<long>();
            incl_trials = check.at("trials").get<long>();
        }
    }
    char detail[160];
    std::snprintf(detail, sizeof detail,
                  "exclusion %ld/%ld violations, inclusion %ld/%ld violations", excl_viol,
                  excl_trials, incl_viol, incl_trials);
    report(5, excl_viol == 0 && incl_viol == 0, "admission bands", detail);
}

// ---- 6: exchangeability ------------------------------------------------------------

void criterion_6() {
    bool identical = true;
    Eigen::VectorXd dir(2);
    dir << 1.0, 0.0;
    const auto spec = MetaSpec::Asymmetric(Eigen::VectorXd::Zero(2), 1.5, dir);
    for (std::uint64_t trial = 0; trial < 10 && identical; ++trial) {
        const auto domains = sample_domains(spec, 12, 0.8, 50, trial);
        const PooledResult base_pool = naive_pool(domains);
        MatchOptions options;
        options.tau = 1.2;
        const MatchOutcome base_match = match_domains(domains, options);

        std::mt19937 gen(static_cast<unsigned>(trial) * 7919u + 13u);
        for (int p = 0; p < 100; ++p) {
            std::vector<Domain> perm = domains;
            std::shuffle(perm.begin(), perm.end(), gen);
            const PooledResult pool = naive_pool(perm);
            const MatchOutcome match = match_domains(perm, options);
            if (pool.mean_estimate != base_pool.mean_estimate ||
                pool.covariance_estimate != base_pool.covariance_estimate ||
                match.state.centroid != base_match.state.centroid ||
                match.state.matched != base_match.state.matched) {
                identical = false;
                break;
            }
        }
    }
    report(6, identical, "exchangeability",
           identical ? "bit-identical under 10x100 permutations" : "permutation changed a result");
}

// ---- 7: matched-set properties -------------------------------------------------------

void criterion_7() {
    const RunConfig config = RunConfig::defaults_for(Regime::properties);
    const auto reportJson = audit_properties(config);
    bool monotone = false, norms = false, variance = false, decay = false;
    double exponent = 0.0;
    for (const auto& check : reportJson.at("checks")) {
        const std::string name = check.at("name");
        const bool passed = check.at("passed").get<bool>();
        if (name == "matched_set_monotonicity") monotone = passed;
        if (name == "matched_set_norm_concentration") norms = passed;
        if (name == "matched_set_variance_bound") variance = passed;
        if (name == "matched_set_decay_exponent") {
            decay = passed;
            if (check.contains("exponent")) exponent = check.at("exponent").get<double>();
        }
    }
    char detail[160];
    std::snprintf(detail, sizeof detail,
                  "monotone=%d norms=%d variance=%d decay_exponent=%.3f (in [1.5,2.5])", monotone,
                  norms, variance, exponent);
    report(7, monotone && norms && variance && decay, "matched-set properties", detail);
}

// ---- 8: flow transport -----------------------------------------------------------------

void criterion_8() {
    const RunConfig config = RunConfig::defaults_for(Regime::transport);
    const auto reportJson = audit_transport(config);
    long var_viol = -1, mean_viol = -1;
    double roundtrip = 1.0;
    for (const auto& check : reportJson.at("checks")) {
        const std::string name = check.at("name");
        if (name == "transport_variance_bound") var_viol = check.at("violations").get<long>();
        if (name == "transport_mean_bound") mean_viol = check.at("violations").get<long>();
        if (name == "roundtrip_invertibility") roundtrip = check.at("max_error").get<double>();
    }
    char detail[160];
    std::snprintf(detail, sizeof detail,
                  "100 flows: variance violations=%ld mean violations=%ld roundtrip=%.2e",
                  var_viol, mean_viol, roundtrip);
    report(8, var_viol == 0 && mean_viol == 0 && roundtrip < 1e-8, "flow transport", detail);
}

// ---- 9: data-addition score ---------------------------------------------------------------

// Straight re-evaluation of the scoring formula, independent of the library.
double da_oracle(const std::array<double, 5>& y, const std::array<double, 4>& s) {
    double total = 0.0;
    for (int i = 0; i < 4; ++i) {
        if (y[i + 1] >= y[i]) total += 1.0 + (y[i + 1] - y[i]) / 10.0 * s[i];
    }
    return total;
}

void criterion_9() {
    DaInput flat;
    flat.y = {80, 80, 80, 80, 80};
    const bool flat_ok = da_score(flat) == 4.0;

    DaInput falling;
    falling.y = {93, 81, 72, 60, 41};
    const bool falling_ok = da_score(falling) == 0.0;

    DaInput rising;
    rising.y = {80, 81, 82, 83, 84};
    // 4.1 is not exactly representable in binary floating point; equality is
    // asserted at 1 part in 10^12.
    const bool rising_ok = std::abs(da_score(rising) - 4.1) < 1e-12;

    // threshold semantics over random tuples in the AUC-percent regime
    // (per-step changes within +-10 points, where >=4 iff no drop is exact)
    Rng rng(17);
    bool oracle_ok = true, iff_ok = true;
    for (int t = 0; t < 10000; ++t) {
        DaInput input;
        input.y[0] = rng.uniform(40.0, 90.0);
        bool drop = false;
        for (int i = 1; i < 5; ++i) {
            const double step = rng.uniform(-10.0, 10.0);
            input.y[static_cast<std::size_t>(i)] = input.y[static_cast<std::size_t>(i - 1)] + step;
            drop = drop || step < 0.0;
        }
        const double got = da_score(input);
        oracle_ok = oracle_ok && got == da_oracle(input.y, input.s);
        iff_ok = iff_ok && ((got >= 4.0) == !drop);
    }
    char detail[160];
    std::snprintf(detail, sizeof detail,
                  "flat=4.0:%d falling=0.0:%d rising~4.1:%d oracle(1e4)=%d iff(1e4)=%d", flat_ok,
                  falling_ok, rising_ok, oracle_ok, iff_ok);
    report(9, flat_ok && falling_ok && rising_ok && oracle_ok && iff_ok, "data-addition score",
           detail);
}

// ---- 10: hypersphere suite --------------------------------------------------------------------

void criterion_10() {
    Rng rng(23);
    bool axioms = true;
    for (int t = 0; t < 10000 && axioms; ++t) {
        const int d = 2 + static_cast<int>(rng.uniform_index(6));
        const Eigen::VectorXd a = rng.unit_vector(d), b = rng.unit_vector(d),
                              c = rng.unit_vector(d);
        const double ab = geodesic_distance(a, b);
        axioms = axioms && ab == geodesic_distance(b, a) && geodesic_distance(a, a) == 0.0 &&
                 ab <= geodesic_distance(a, c) + geodesic_distance(c, b) + 1e-9;
    }

    bool ema_unit = true;
    for (int t = 0; t < 10000 && ema_unit; ++t) {
        const int d = 2 + static_cast<int>(rng.uniform_index(6));
        const Eigen::VectorXd out =
            ema_centroid_update(rng.unit_vector(d), rng.unit_vector(d), 0.5);
        ema_unit = std::abs(out.norm() - 1.0) <= 1e-12;
    }

    // separated modes: zero cross-mode assignments over 1e5 draws
    const int d = 3;
    std::vector<Eigen::VectorXd> modes{Eigen::VectorXd::Zero(d),
                                       (Eigen::VectorXd(d) << 12.0, 0, 0).finished(),
                                       (Eigen::VectorXd(d) << 0, 12.0, 0).finished()};
    ModeBank bank;
    bank.centroids = modes;
    bank.taus = {1.6, 1.6, 1.6};
    const double R_max = 1.5;
    bool separated = check_mode_separation(modes, bank, R_max, 0.1);
    long cross = 0, unassigned = 0;
    for (int t = 0; t < 100000; ++t) {
        const int mode = static_cast<int>(rng.uniform_index(3));
        const Eigen::VectorXd x = modes[static_cast<std::size_t>(mode)] +
                                  rng.ball_vector(Eigen::VectorXd::Zero(d), R_max);
        const auto assigned = multimodal_assign(x, bank);
        if (!assigned) ++unassigned;
        else if (*assigned != mode) ++cross;
    }

    // VACA neutrality at gamma = 0 is bit-exact
    PatchTensor patches(2, 4, 8);
    for (auto& x : patches.data) x = rng.normal();
    for (long b = 0; b < 2; ++b)
        for (long n = 0; n < 4; ++n) {
            double sq = 0.0;
            for (long ch = 0; ch < 8; ++ch) sq += patches.at(b, n, ch) * patches.at(b, n, ch);
            for (long ch = 0; ch < 8; ++ch) patches.at(b, n, ch) /= std::sqrt(sq);
        }
    Eigen::MatrixXd T(8, 2);
    T.col(0) = rng.unit_vector(8);
    T.col(1) = rng.unit_vector(8);
    const VacaResult vaca = vaca_reweight(patches, T, softplus_gain, 0.0);
    const bool neutral = vaca.reweighted.data == patches.data;

    const bool ok = axioms && ema_unit && separated && cross == 0 && unassigned == 0 && neutral;
    char detail[200];
    std::snprintf(detail, sizeof detail,
                  "axioms=%d ema_unit=%d cross_mode=%ld/1e5 unassigned=%ld gamma0_bit_neutral=%d",
                  axioms, ema_unit, cross, unassigned, neutral);
    report(10, ok, "hypersphere suite", detail);
}

}  // namespace

int main() {
    const auto start = std::chrono::steady_clock::now();
    criterion_1();
    criterion_2();
    criterion_3();
    criterion_4();
    criterion_5();
    criterion_6();
    criterion_7();
    criterion_8();
    criterion_9();
    criterion_10();
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    // leave headroom for the unit suite inside the 5-minute budget
    report(11, seconds < 240.0, "suite runtime", std::to_string(seconds) + "s (< 240s budget)");

    std::printf("%d/11 criteria passed\n", 11 - failures);
    return failures;
}
