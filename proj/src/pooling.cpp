#include "poolmatch/pooling.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "poolmatch/rng.hpp"

namespace poolmatch {

namespace {

constexpr std::uint64_t kSubsampleSelectStream = 0x73656c6563ULL;
constexpr std::uint64_t kSubsampleDrawStream = 0x64726177ULL;
constexpr std::uint64_t kBootstrapStream = 0x626f6f74ULL;

// Canonical iteration order: ascending domain index.  Every aggregate below
// walks domains in this order so that floating-point accumulation is
// independent of the order of the caller's list.
std::vector<const Domain*> sorted_by_index(const std::vector<Domain>& domains) {
    std::vector<const Domain*> ptrs;
    ptrs.reserve(domains.size());
    for (const auto& d : domains) ptrs.push_back(&d);
    std::sort(ptrs.begin(), ptrs.end(),
              [](const Domain* a, const Domain* b) { return a->index < b->index; });
    return ptrs;
}

void require_consistent(const std::vector<Domain>& domains) {
    if (domains.empty()) throw std::invalid_argument("pooling: no domains given");
    const int d = domains.front().dim();
    for (const auto& dom : domains) {
        if (dom.count() < 1) throw std::invalid_argument("pooling: domain without samples");
        if (dom.dim() != d) throw std::invalid_argument("pooling: mixed sample dimensions");
    }
}

// Mean and unbiased covariance accumulated in the given order.
struct Accumulator {
    explicit Accumulator(int dim)
        : sum(Eigen::VectorXd::Zero(dim)), scatter(Eigen::MatrixXd::Zero(dim, dim)) {}

    void add_row(const Eigen::Ref<const Eigen::RowVectorXd>& x) {
        sum += x.transpose();
        scatter += x.transpose() * x;
        ++count;
    }

    Eigen::VectorXd mean() const { return sum / static_cast<double>(count); }

    Eigen::MatrixXd covariance() const {
        if (count < 2) return Eigen::MatrixXd::Zero(sum.size(), sum.size());
        const Eigen::VectorXd mu = mean();
        // scale the outer product, not the vector, to keep the result
        // bitwise symmetric
        return (scatter - static_cast<double>(count) * (mu * mu.transpose()).eval()) /
               static_cast<double>(count - 1);
    }

    Eigen::VectorXd sum;
    Eigen::MatrixXd scatter;
    long count = 0;
};

Eigen::VectorXd domain_location(const Domain& d, bool use_true_means) {
    return use_true_means ? d.mean : d.empirical_mean();
}

// Coordinate-wise median over all samples of all domains, index order.
Eigen::VectorXd sample_median(const std::vector<const Domain*>& ordered) {
    const int dim = ordered.front()->dim();
    long total = 0;
    for (const auto* d : ordered) total += d->count();
    Eigen::VectorXd median(dim);
    std::vector<double> column(static_cast<std::size_t>(total));
    for (int j = 0; j < dim; ++j) {
        std::size_t at = 0;
        for (const auto* d : ordered)
            for (int i = 0; i < d->count(); ++i) column[at++] = d->samples(i, j);
        const std::size_t mid = column.size() / 2;
        std::nth_element(column.begin(), column.begin() + static_cast<long>(mid), column.end());
        double med = column[mid];
        if (column.size() % 2 == 0) {
            const double lower =
                *std::max_element(column.begin(), column.begin() + static_cast<long>(mid));
            med = 0.5 * (lower + med);
        }
        median[j] = med;
    }
    return median;
}

}  // namespace

const char* strategy_name(Strategy s) {
    switch (s) {
        case Strategy::naive: return "naive";
        case Strategy::subsample: return "subsample";
        case Strategy::matching: return "matching";
    }
    return "unknown";
}

PooledResult naive_pool(const std::vector<Domain>& domains) {
    require_consistent(domains);
    const auto ordered = sorted_by_index(domains);
    Accumulator acc(ordered.front()->dim());
    PooledResult result;
    result.strategy = Strategy::naive;
    for (const auto* d : ordered) {
        for (int i = 0; i < d->count(); ++i) acc.add_row(d->samples.row(i));
        result.included_domains.insert(d->index);
    }
    result.mean_estimate = acc.mean();
    result.covariance_estimate = acc.covariance();
    result.total_samples = acc.count;
    return result;
}

PooledResult uniform_subsample(const std::vector<Domain>& domains, int m, int n,
                               std::uint64_t seed) {
    require_consistent(domains);
    const int K = static_cast<int>(domains.size());
    if (m < 1 || m > K) throw std::invalid_argument("uniform_subsample: need 1 <= m <= K");
    if (n < 1) throw std::invalid_argument("uniform_subsample: need n >= 1");

    const auto ordered = sorted_by_index(domains);

    // Partial Fisher-Yates over the canonical order: the first m slots end up
    // a uniform m-subset, independent of the caller's list order.
    std::vector<int> positions(ordered.size());
    for (std::size_t i = 0; i < positions.size(); ++i) positions[i] = static_cast<int>(i);
    Rng select_rng(derive_seed(seed, kSubsampleSelectStream));
    for (int i = 0; i < m; ++i) {
        const auto j =
            i + static_cast<int>(select_rng.uniform_index(static_cast<std::uint64_t>(K - i)));
        std::swap(positions[static_cast<std::size_t>(i)], positions[static_cast<std::size_t>(j)]);
    }
    std::vector<int> chosen(positions.begin(), positions.begin() + m);
    std::sort(chosen.begin(), chosen.end());

    Accumulator acc(ordered.front()->dim());
    PooledResult result;
    result.strategy = Strategy::subsample;
    for (const int pos : chosen) {
        const Domain& d = *ordered[static_cast<std::size_t>(pos)];
        Rng draw_rng(derive_seed(seed, kSubsampleDrawStream, static_cast<std::uint64_t>(d.index)));
        for (int j = 0; j < n; ++j) {
            const auto row = draw_rng.uniform_index(static_cast<std::uint64_t>(d.count()));
            acc.add_row(d.samples.row(static_cast<int>(row)));
        }
        result.included_domains.insert(d.index);
    }
    result.mean_estimate = acc.mean();
    result.covariance_estimate = acc.covariance();
    result.total_samples = acc.count;
    return result;
}

MatchOutcome match_domains(const std::vector<Domain>& domains, const MatchOptions& options) {
    require_consistent(domains);
    if (!(options.tau > 0.0)) throw std::invalid_argument("match_domains: tau must be > 0");
    if (!(options.tol > 0.0)) throw std::invalid_argument("match_domains: tol must be > 0");
    if (options.max_iter < 1) throw std::invalid_argument("match_domains: max_iter must be >= 1");

    const auto ordered = sorted_by_index(domains);
    const int dim = ordered.front()->dim();

    std::vector<Eigen::VectorXd> locations;
    locations.reserve(ordered.size());
    for (const auto* d : ordered) locations.push_back(domain_location(*d, options.use_true_means));

    MatchState state;
    state.tau = options.tau;
    state.metric = options.metric;

    switch (options.init) {
        case CentroidInit::median:
            state.centroid = sample_median(ordered);
            break;
        case CentroidInit::target_oracle:
            if (!options.oracle_target)
                throw std::invalid_argument("match_domains: target_oracle init needs oracle_target");
            state.centroid = *options.oracle_target;
            break;
        case CentroidInit::zero:
            state.centroid = Eigen::VectorXd::Zero(dim);
            break;
    }

    // Selection under the strict rule M(mu_hat - c) < tau, with the nearest
    // domain as fallback when the ball is empty.
    const auto select = [&](const Eigen::VectorXd& c, bool* fell_back) {
        std::vector<std::size_t> sel;
        double best = std::numeric_limits<double>::infinity();
        std::size_t nearest = 0;
        for (std::size_t i = 0; i < locations.size(); ++i) {
            const double dist = metric_eval(options.metric, locations[i] - c);
            if (dist < options.tau) sel.push_back(i);
            if (dist < best) {
                best = dist;
                nearest = i;
            }
        }
        if (sel.empty()) {
            sel.push_back(nearest);
            if (fell_back) *fell_back = true;
        }
        return sel;
    };

    const auto weighted_mean = [&](const std::vector<std::size_t>& sel) {
        Eigen::VectorXd sum = Eigen::VectorXd::Zero(dim);
        double weight = 0.0;
        for (const auto i : sel) {
            const double w = static_cast<double>(ordered[i]->count());
            sum += w * locations[i];
            weight += w;
        }
        return (sum / weight).eval();
    };

    std::vector<std::size_t> selection;
    for (int iter = 1; iter <= options.max_iter; ++iter) {
        bool fell_back = false;
        selection = select(state.centroid, &fell_back);
        state.degenerate = state.degenerate || fell_back;
        const Eigen::VectorXd next = weighted_mean(selection);
        const double delta = (next - state.centroid).norm();
        state.centroid = next;
        state.trace.push_back(next);
        state.iterations = iter;
        if (delta < options.tol && select(state.centroid, nullptr) == selection) {
            state.converged = true;
            break;
        }
    }

    state.matched.clear();
    state.matched_samples = 0;
    Accumulator acc(dim);
    PooledResult pooled;
    pooled.strategy = Strategy::matching;
    for (const auto i : selection) {
        const Domain& d = *ordered[i];
        state.matched.insert(d.index);
        state.matched_samples += d.count();
        pooled.included_domains.insert(d.index);
        for (int r = 0; r < d.count(); ++r) acc.add_row(d.samples.row(r));
    }
    pooled.mean_estimate = state.centroid;
    pooled.covariance_estimate = acc.covariance();
    pooled.total_samples = state.matched_samples;
    return MatchOutcome{std::move(state), std::move(pooled)};
}

AddStepResult add_domain_step_naive(PooledResult& aggregate, const Domain& domain,
                                    const Eigen::VectorXd& mu_star) {
    const double eps_old = (aggregate.mean_estimate - mu_star).norm();
    const double n_a = static_cast<double>(aggregate.total_samples);
    const double n_b = static_cast<double>(domain.count());
    const Eigen::VectorXd mean_b = domain.empirical_mean();

    // Exact two-set merge of mean and scatter.
    Eigen::MatrixXd scatter_b = Eigen::MatrixXd::Zero(domain.dim(), domain.dim());
    for (int i = 0; i < domain.count(); ++i) {
        const Eigen::VectorXd r = domain.samples.row(i).transpose() - mean_b;
        scatter_b += r * r.transpose();
    }
    const Eigen::MatrixXd scatter_a =
        aggregate.covariance_estimate * std::max(0.0, n_a - 1.0);
    const Eigen::VectorXd delta = mean_b - aggregate.mean_estimate;
    const double n = n_a + n_b;

    aggregate.mean_estimate += delta * (n_b / n);
    const Eigen::MatrixXd merged =
        scatter_a + scatter_b + (n_a * n_b / n) * (delta * delta.transpose()).eval();
    aggregate.covariance_estimate =
        n > 1.0 ? (merged / (n - 1.0)).eval()
                : Eigen::MatrixXd::Zero(domain.dim(), domain.dim()).eval();
    aggregate.total_samples += domain.count();
    aggregate.included_domains.insert(domain.index);

    AddStepResult step;
    step.admitted = true;
    step.epsilon = (aggregate.mean_estimate - mu_star).norm();
    step.delta_epsilon = step.epsilon - eps_old;
    return step;
}

AddStepResult add_domain_step_matching(MatchState& state, const Domain& domain,
                                       const Eigen::VectorXd& mu_star, bool use_true_means) {
    const double eps_old = (state.centroid - mu_star).norm();
    const Eigen::VectorXd location = domain_location(domain, use_true_means);
    const double dist = metric_eval(state.metric, location - state.centroid);

    AddStepResult step;
    if (!(dist < state.tau)) {
        // Rejection is cost-free: no field of the state changes.
        step.admitted = false;
        step.epsilon = eps_old;
        step.delta_epsilon = 0.0;
        return step;
    }

    const double w_old = static_cast<double>(state.matched_samples);
    const double w_new = static_cast<double>(domain.count());
    state.centroid = (w_old * state.centroid + w_new * location) / (w_old + w_new);
    state.matched.insert(domain.index);
    state.matched_samples += domain.count();
    state.trace.push_back(state.centroid);

    step.admitted = true;
    step.epsilon = (state.centroid - mu_star).norm();
    step.delta_epsilon = step.epsilon - eps_old;
    return step;
}

bool MatchedSetReport::all_subset_checks_hold() const {
    return std::all_of(monotonicity.begin(), monotonicity.end(),
                       [](const PairCheck& p) { return p.subset_holds; });
}

bool MatchedSetReport::all_bounds_hold() const {
    return std::all_of(per_tau.begin(), per_tau.end(), [](const TauCheck& t) {
        return t.norm_concentrated && t.variance_bounded;
    });
}

MatchedSetReport matched_set_report(const MatchState& state, const std::vector<Domain>& domains,
                                    const std::vector<double>& taus, int trial_count,
                                    std::uint64_t seed) {
    require_consistent(domains);
    if (!std::is_sorted(taus.begin(), taus.end()))
        throw std::invalid_argument("matched_set_report: taus must be sorted ascending");

    const auto ordered = sorted_by_index(domains);
    const int dim = ordered.front()->dim();
    long total = 0;
    for (const auto* d : ordered) total += d->count();

    Eigen::MatrixXd cloud(total, dim);
    long at = 0;
    for (const auto* d : ordered) {
        cloud.middleRows(at, d->count()) = d->samples;
        at += d->count();
    }

    std::vector<double> dist(static_cast<std::size_t>(total));
    for (long i = 0; i < total; ++i)
        dist[static_cast<std::size_t>(i)] =
            metric_eval(state.metric, cloud.row(i).transpose() - state.centroid);

    MatchedSetReport report;
    const double centroid_norm = state.centroid.norm();

    std::vector<std::vector<bool>> member(taus.size());
    for (std::size_t t = 0; t < taus.size(); ++t) {
        const double tau = taus[t];
        auto& in = member[t];
        in.resize(static_cast<std::size_t>(total));

        MatchedSetReport::TauCheck check;
        check.tau = tau;
        Eigen::VectorXd sum = Eigen::VectorXd::Zero(dim);
        double norm_sum = 0.0;
        long count = 0;
        for (long i = 0; i < total; ++i) {
            const bool inside = dist[static_cast<std::size_t>(i)] < tau;
            in[static_cast<std::size_t>(i)] = inside;
            if (inside) {
                sum += cloud.row(i).transpose();
                norm_sum += cloud.row(i).norm();
                ++count;
            }
        }
        check.set_size = count;
        check.norm_bound = state.metric.L * tau;
        check.variance_bound = check.norm_bound * check.norm_bound;
        if (count > 0) {
            const Eigen::VectorXd mean = sum / static_cast<double>(count);
            check.norm_gap = std::abs(norm_sum / static_cast<double>(count) - centroid_norm);
            double sq = 0.0;
            for (long i = 0; i < total; ++i)
                if (in[static_cast<std::size_t>(i)])
                    sq += (cloud.row(i).transpose() - mean).squaredNorm();
            check.variance = sq / static_cast<double>(count);
        }
        check.norm_concentrated = check.norm_gap <= check.norm_bound;
        check.variance_bounded = check.variance <= check.variance_bound;
        report.per_tau.push_back(check);
    }

    for (std::size_t a = 0; a < taus.size(); ++a) {
        for (std::size_t b = a + 1; b < taus.size(); ++b) {
            MatchedSetReport::PairCheck pair;
            pair.tau_lo = taus[a];
            pair.tau_hi = taus[b];
            pair.subset_holds = true;
            for (long i = 0; i < total; ++i) {
                if (member[a][static_cast<std::size_t>(i)] &&
                    !member[b][static_cast<std::size_t>(i)]) {
                    pair.subset_holds = false;
                    break;
                }
            }
            report.monotonicity.push_back(pair);
        }
    }

    if (taus.size() < 2) {
        report.notice = "decay fit skipped: need at least 2 taus";
        return report;
    }

    // E|S| per tau, optionally averaged over bootstrap resamples of the cloud.
    std::vector<double> counts(taus.size(), 0.0);
    const int trials = std::max(1, trial_count);
    for (int trial = 0; trial < trials; ++trial) {
        if (trial == 0 && trials == 1) {
            for (std::size_t t = 0; t < taus.size(); ++t)
                for (long i = 0; i < total; ++i)
                    counts[t] += member[t][static_cast<std::size_t>(i)] ? 1.0 : 0.0;
            break;
        }
        Rng rng(derive_seed(seed, kBootstrapStream, static_cast<std::uint64_t>(trial)));
        for (long i = 0; i < total; ++i) {
            const auto pick = rng.uniform_index(static_cast<std::uint64_t>(total));
            const double d0 = dist[static_cast<std::size_t>(pick)];
            for (std::size_t t = 0; t < taus.size(); ++t)
                if (d0 < taus[t]) counts[t] += 1.0;
        }
    }

    std::vector<double> lx, ly;
    for (std::size_t t = 0; t < taus.size(); ++t) {
        const double avg = counts[t] / static_cast<double>(trials);
        if (avg > 0.0 && taus[t] > 0.0) {
            lx.push_back(std::log(taus[t]));
            ly.push_back(std::log(avg));
        }
    }
    if (lx.size() < 2) {
        report.notice = "decay fit skipped: fewer than 2 taus with nonempty sets";
        return report;
    }
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        mx += lx[i];
        my += ly[i];
    }
    mx /= static_cast<double>(lx.size());
    my /= static_cast<double>(lx.size());
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        sxy += (lx[i] - mx) * (ly[i] - my);
        sxx += (lx[i] - mx) * (lx[i] - mx);
    }
    report.decay_exponent = sxy / sxx;
    return report;
}

}  // namespace poolmatch
