#include "poolmatch/evaluation.hpp"

#include <cmath>
#include <stdexcept>

namespace poolmatch {

double error_norm(const Eigen::Ref<const Eigen::VectorXd>& estimate,
                  const Eigen::Ref<const Eigen::VectorXd>& mu_star) {
    if (estimate.size() != mu_star.size())
        throw std::invalid_argument("error_norm: dimension mismatch");
    return (estimate - mu_star).norm();
}

double da_score(const DaInput& input) {
    double score = 0.0;
    for (std::size_t i = 0; i < 4; ++i) {
        const double gain = input.y[i + 1] - input.y[i];
        if (gain >= 0.0) score += 1.0 + gain / 10.0 * input.s[i];
    }
    return score;
}

bool Trajectory::consistent(double tol) const {
    for (std::size_t i = 0; i < steps.size(); ++i) {
        if (steps[i].epsilon < 0.0) return false;
        if (i == 0) continue;
        if (steps[i].strategy != steps[i - 1].strategy) continue;
        const double expected = steps[i].epsilon - steps[i - 1].epsilon;
        if (std::abs(steps[i].delta_epsilon - expected) > tol) return false;
    }
    return true;
}

double covariance_limit_check(const Eigen::MatrixXd& empirical_covariance, double sigma,
                              const Eigen::MatrixXd& sigma_mu, CovarianceLimit mode) {
    if (!(sigma > 0.0)) throw std::invalid_argument("covariance_limit_check: sigma must be > 0");
    const long d = empirical_covariance.rows();
    if (empirical_covariance.cols() != d)
        throw std::invalid_argument("covariance_limit_check: covariance must be square");
    Eigen::MatrixXd target = sigma * sigma * Eigen::MatrixXd::Identity(d, d);
    if (mode == CovarianceLimit::pool_limit) {
        if (sigma_mu.rows() != d || sigma_mu.cols() != d)
            throw std::invalid_argument("covariance_limit_check: Sigma_mu shape mismatch");
        target += sigma_mu;
    }
    return (empirical_covariance - target).norm() / target.norm();
}

double covariance_limit_check(const PooledResult& result, double sigma,
                              const Eigen::MatrixXd& sigma_mu, CovarianceLimit mode) {
    return covariance_limit_check(result.covariance_estimate, sigma, sigma_mu, mode);
}

}  // namespace poolmatch
