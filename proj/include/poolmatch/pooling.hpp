#pragma once

// The three pooling strategies over realized domains: naive pooling of every
// sample, uniform subsampling, and matching with iterative centroid
// refinement.  Also the K -> K+1 domain-addition steppers and the matched-set
// property report.
//
// All aggregation iterates domains in ascending index order regardless of the
// order of the input list, so results are bit-identical under permutations of
// the domain list (exchangeability).

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "poolmatch/meta.hpp"
#include "poolmatch/metric.hpp"

namespace poolmatch {

enum class Strategy { naive, subsample, matching };

const char* strategy_name(Strategy s);

struct PooledResult {
    Strategy strategy = Strategy::naive;
    Eigen::VectorXd mean_estimate;
    Eigen::MatrixXd covariance_estimate;  // unbiased (n-1) sample covariance
    std::set<int> included_domains;
    long total_samples = 0;
};

enum class CentroidInit {
    median,         // coordinate-wise median over all samples
    target_oracle,  // start at a supplied target (tests with a known target)
    zero,           // origin
};

struct MatchOptions {
    double tau = 1.0;
    MetricSpec metric = MetricSpec::Euclidean();
    CentroidInit init = CentroidInit::median;
    double tol = 1e-4;
    int max_iter = 100;
    // Select on true means instead of empirical means (oracle-mean mode).
    bool use_true_means = false;
    // Required when init == target_oracle.
    std::optional<Eigen::VectorXd> oracle_target;
};

struct MatchState {
    Eigen::VectorXd centroid;
    double tau = 0.0;
    MetricSpec metric;
    std::set<int> matched;      // domain indices in S at the final centroid
    long matched_samples = 0;   // total sample count over S
    int iterations = 0;
    bool converged = false;
    bool degenerate = false;    // an iteration saw S empty and fell back to the nearest domain
    std::vector<Eigen::VectorXd> trace;  // centroid after every update
};

struct MatchOutcome {
    MatchState state;
    PooledResult pooled;
};

// Pools every sample from every domain, count-weighted.
PooledResult naive_pool(const std::vector<Domain>& domains);

// Draws m domains uniformly without replacement, then n samples with
// replacement from each.  Throws when m exceeds the number of domains.
PooledResult uniform_subsample(const std::vector<Domain>& domains, int m, int n,
                               std::uint64_t seed);

// Iterates  S = {k : M(mu_hat_k - c) < tau}  followed by the
// sample-count-weighted mean update of c, until the centroid moves less than
// tol (and S is stable) or max_iter is reached.  An empty selection falls
// back to the single nearest domain and flags the state degenerate.
MatchOutcome match_domains(const std::vector<Domain>& domains, const MatchOptions& options);

struct AddStepResult {
    bool admitted = false;
    double delta_epsilon = 0.0;  // epsilon_{K+1} - epsilon_K against mu_star
    double epsilon = 0.0;        // epsilon_{K+1}
};

// One naive-pooling step: merges the new domain into the aggregate
// (sample-weighted); mean and covariance are updated exactly.
AddStepResult add_domain_step_naive(PooledResult& aggregate, const Domain& domain,
                                    const Eigen::VectorXd& mu_star);

// One matching step: admit iff M(mu_hat - c) < tau; on rejection the state is
// left untouched (bit-identical, delta_epsilon exactly 0); on admission the
// centroid takes one weighted pull toward the new domain (no re-selection).
AddStepResult add_domain_step_matching(MatchState& state, const Domain& domain,
                                       const Eigen::VectorXd& mu_star,
                                       bool use_true_means = false);

// Matched-set properties at sample level, S(tau) = {x : M(x - c) < tau} over
// the pooled samples of `domains` with c the state's centroid:
//   monotonicity   S(tau1) subset of S(tau2) for every ascending pair,
//   concentration  | avg |x|_2 - |c|_2 | <= L * tau,
//   decay          log-log slope of E|S| vs tau (needs >= 2 taus),
//   variance       empirical variance of S <= (L * tau)^2.
struct MatchedSetReport {
    struct PairCheck {
        double tau_lo = 0.0, tau_hi = 0.0;
        bool subset_holds = false;
    };
    struct TauCheck {
        double tau = 0.0;
        long set_size = 0;
        bool norm_concentrated = false;
        double norm_gap = 0.0;       // | avg |x| - |c| |
        double norm_bound = 0.0;     // L * tau
        bool variance_bounded = false;
        double variance = 0.0;       // mean squared distance to the matched mean
        double variance_bound = 0.0; // (L * tau)^2
    };
    std::vector<PairCheck> monotonicity;
    std::vector<TauCheck> per_tau;
    std::optional<double> decay_exponent;
    std::string notice;

    bool all_subset_checks_hold() const;
    bool all_bounds_hold() const;
};

// trial_count > 1 additionally averages the per-tau counts used by the decay
// fit over seeded bootstrap resamples of the pooled cloud; the boolean checks
// always use the raw samples.  taus must be sorted ascending.
MatchedSetReport matched_set_report(const MatchState& state, const std::vector<Domain>& domains,
                                    const std::vector<double>& taus, int trial_count,
                                    std::uint64_t seed = 0);

}  // namespace poolmatch
