#pragma once

// Error trajectories, the data-addition score, and covariance-limit
// diagnostics.

#include <array>
#include <vector>

#include <Eigen/Dense>

#include "poolmatch/pooling.hpp"

namespace poolmatch {

// |estimate - mu_star|_2.  Throws on dimension mismatch.
double error_norm(const Eigen::Ref<const Eigen::VectorXd>& estimate,
                  const Eigen::Ref<const Eigen::VectorXd>& mu_star);

struct DaInput {
    std::array<double, 5> y{};                       // performance after 1..5 domains
    std::array<double, 4> s{0.1, 0.2, 0.3, 0.4};     // importance weights per step
};

// Sum over the four steps of  1{y_{i+1} >= y_i} * (1 + (y_{i+1} - y_i)/10 * s_i).
// Equal consecutive values count as non-deterioration.  A score >= 4
// certifies that no step decreased whenever per-step changes stay below
// 10 / max(s) = 25 points (always the case on AUC-percent sequences); wilder
// swings can recover a dropped step's point through the gain terms.
double da_score(const DaInput& input);

struct Trajectory {
    struct Step {
        int K = 0;
        Strategy strategy = Strategy::naive;
        double epsilon = 0.0;
        double delta_epsilon = 0.0;
        long set_size = 0;
        bool admitted = true;
    };
    std::vector<Step> steps;

    // Checks epsilon >= 0 everywhere and delta_epsilon(t) = eps(t) - eps(t-1)
    // for consecutive steps of the same strategy.
    bool consistent(double tol = 1e-12) const;
};

enum class CovarianceLimit { pool_limit, match_limit };

// Relative Frobenius distance between the result's covariance estimate and
// sigma^2 I + Sigma_mu (pool_limit) or sigma^2 I (match_limit).
double covariance_limit_check(const PooledResult& result, double sigma,
                              const Eigen::MatrixXd& sigma_mu, CovarianceLimit mode);

// Same check against an explicitly supplied empirical covariance (used when
// covariances are averaged across seeds before comparing).
double covariance_limit_check(const Eigen::MatrixXd& empirical_covariance, double sigma,
                              const Eigen::MatrixXd& sigma_mu, CovarianceLimit mode);

}  // namespace poolmatch
