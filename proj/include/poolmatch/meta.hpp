#pragma once

// Meta-distributions over domain means and within-domain Gaussian sampling.
//
// A MetaSpec describes the law of the domain means mu_k around a target
// mu_star; a Domain is one realized source: its true mean, an isotropic
// within-domain noise level sigma, and N_k samples.
//
// Generator laws (all centered constructions are documented here because the
// configuration schema refers back to them):
//   symmetric(gamma):      mu_k = mu_star + gamma * z,  z ~ N(0, I_d).
//                          Sign-symmetric per coordinate; Cov = gamma^2 I.
//   asymmetric(alpha,u):   mixture  0.7 * N(mu_star, 0.5^2 I)
//                                 + 0.3 * N(mu_star + 2*alpha*u, 0.3^2 I).
//                          Extra directional mass along the unit vector u;
//                          E[mu_k] - mu_star = 0.6 * alpha * u, light tails.
//   two_point(c, p):       mu_k = mu_star + c with probability p, else mu_star.
//                          Cov = p(1-p) c c^T.
//   outlier_sequence:      every `every`-th mean (1-based) sits at exactly
//                          `outlier_distance` from mu_star along one direction
//                          drawn per sequence from the signed coordinate axes
//                          (axis placement keeps the distance bit-exact and
//                          the contamination systematically one-sided); all
//                          other means come from `base`.

#include <cstdint>
#include <memory>
#include <vector>

#include <Eigen/Dense>

namespace poolmatch {

enum class MetaKind { symmetric, asymmetric, two_point, outlier_sequence };

struct MetaSpec {
    MetaKind kind = MetaKind::symmetric;
    Eigen::VectorXd mu_star;

    // symmetric
    double gamma = 1.0;
    // asymmetric
    double alpha = 1.0;
    Eigen::VectorXd direction;
    // two_point
    Eigen::VectorXd offset;
    double prob = 0.0;
    // outlier_sequence
    std::shared_ptr<MetaSpec> base;
    double outlier_distance = 0.0;
    int every = 1;

    int dim() const { return static_cast<int>(mu_star.size()); }

    static MetaSpec Symmetric(Eigen::VectorXd mu_star, double gamma);
    static MetaSpec Asymmetric(Eigen::VectorXd mu_star, double alpha, Eigen::VectorXd direction);
    static MetaSpec TwoPoint(Eigen::VectorXd mu_star, Eigen::VectorXd offset, double prob);
    static MetaSpec OutlierSequence(MetaSpec base, double outlier_distance, int every);

    // Closed-form E[mu_k] of the generator (outlier_sequence: of its base).
    Eigen::VectorXd mean_of_means() const;

    // True iff Cov(mu_k) has the closed form returned by sigma_mu().
    bool has_closed_form_sigma_mu() const;
    Eigen::MatrixXd sigma_mu() const;

    const char* kind_name() const;
};

struct Domain {
    int index = 0;                // domain id k; canonical ordering key
    Eigen::VectorXd mean;         // true mean mu_k
    double sigma = 0.0;           // isotropic within-domain std
    Eigen::MatrixXd samples;      // N_k x d, one sample per row

    int count() const { return static_cast<int>(samples.rows()); }
    int dim() const { return static_cast<int>(samples.cols()); }
    Eigen::VectorXd empirical_mean() const { return samples.colwise().mean(); }
};

// K domain means, deterministic in (spec, K, seed).  Mean k is generated from
// the sub-stream (seed, k), so any prefix of the sequence is stable as K grows
// and domains may be generated in parallel in any order.
std::vector<Eigen::VectorXd> sample_domain_means(const MetaSpec& spec, int K, std::uint64_t seed);

// Convenience form of sample_domain_means for an outlier_sequence built on `base`.
std::vector<Eigen::VectorXd> outlier_sequence_means(const MetaSpec& base, double outlier_distance,
                                                    int every, int K, std::uint64_t seed);

// N i.i.d. draws from N(mean, sigma^2 I); with sigma = 0 every sample equals
// `mean` exactly.  Deterministic per seed.
Domain sample_domain(const Eigen::VectorXd& mean, double sigma, int N, std::uint64_t seed,
                     int index = 0);

// Full hierarchy: means from `spec`, then N samples per domain, all derived
// from per-domain sub-seeds of `seed`.
std::vector<Domain> sample_domains(const MetaSpec& spec, int K, double sigma, int N,
                                   std::uint64_t seed);

// Monte-Carlo Cov(mu_k) for generators without a closed form: unbiased
// covariance over `draws` generated means.  Callers cache the result.
Eigen::MatrixXd sigma_mu_monte_carlo(const MetaSpec& spec, int draws, std::uint64_t seed);

}  // namespace poolmatch
