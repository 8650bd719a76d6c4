#include "poolmatch/meta.hpp"

#include <stdexcept>

#include "poolmatch/rng.hpp"

namespace poolmatch {

namespace {

// Stream tags separating the independent random uses of one master seed.
constexpr std::uint64_t kMeansStream = 0x6d65616e73ULL;      // domain means
constexpr std::uint64_t kSamplesStream = 0x73616d706cULL;    // within-domain samples
constexpr std::uint64_t kDirectionStream = 0x646972ULL;      // outlier axis

// Mixture constants of the asymmetric generator (see header).
constexpr double kAsymOutlierWeight = 0.3;
constexpr double kAsymCoreSpread = 0.5;
constexpr double kAsymOutlierSpread = 0.3;
constexpr double kAsymShiftFactor = 2.0;  // shift distance = factor * alpha

Eigen::VectorXd draw_mean(const MetaSpec& spec, Rng& rng) {
    switch (spec.kind) {
        case MetaKind::symmetric:
            return spec.mu_star + spec.gamma * rng.normal_vector(spec.dim());
        case MetaKind::asymmetric: {
            if (rng.uniform01() < kAsymOutlierWeight) {
                return spec.mu_star + kAsymShiftFactor * spec.alpha * spec.direction +
                       kAsymOutlierSpread * rng.normal_vector(spec.dim());
            }
            return spec.mu_star + kAsymCoreSpread * rng.normal_vector(spec.dim());
        }
        case MetaKind::two_point:
            return rng.uniform01() < spec.prob ? (spec.mu_star + spec.offset).eval()
                                               : spec.mu_star;
        case MetaKind::outlier_sequence:
            throw std::logic_error("draw_mean: outlier_sequence handled by caller");
    }
    throw std::logic_error("draw_mean: unhandled kind");
}

// Signed coordinate axis, uniform over the 2d choices.
Eigen::VectorXd signed_axis(int dim, Rng& rng) {
    const auto pick = rng.uniform_index(static_cast<std::uint64_t>(2 * dim));
    Eigen::VectorXd u = Eigen::VectorXd::Zero(dim);
    u[static_cast<int>(pick / 2)] = (pick % 2 == 0) ? 1.0 : -1.0;
    return u;
}

}  // namespace

MetaSpec MetaSpec::Symmetric(Eigen::VectorXd mu_star, double gamma) {
    if (!(gamma > 0.0)) throw std::invalid_argument("symmetric meta requires gamma > 0");
    MetaSpec s;
    s.kind = MetaKind::symmetric;
    s.mu_star = std::move(mu_star);
    s.gamma = gamma;
    return s;
}

MetaSpec MetaSpec::Asymmetric(Eigen::VectorXd mu_star, double alpha, Eigen::VectorXd direction) {
    if (!(alpha > 0.0)) throw std::invalid_argument("asymmetric meta requires alpha > 0");
    if (direction.size() != mu_star.size())
        throw std::invalid_argument("asymmetric meta: direction dimension mismatch");
    const double norm = direction.norm();
    if (norm == 0.0) throw std::invalid_argument("asymmetric meta: zero direction");
    MetaSpec s;
    s.kind = MetaKind::asymmetric;
    s.mu_star = std::move(mu_star);
    s.alpha = alpha;
    s.direction = direction / norm;
    return s;
}

MetaSpec MetaSpec::TwoPoint(Eigen::VectorXd mu_star, Eigen::VectorXd offset, double prob) {
    if (prob < 0.0 || prob > 1.0) throw std::invalid_argument("two_point meta: prob outside [0,1]");
    if (offset.size() != mu_star.size())
        throw std::invalid_argument("two_point meta: offset dimension mismatch");
    MetaSpec s;
    s.kind = MetaKind::two_point;
    s.mu_star = std::move(mu_star);
    s.offset = std::move(offset);
    s.prob = prob;
    return s;
}

MetaSpec MetaSpec::OutlierSequence(MetaSpec base, double outlier_distance, int every) {
    if (!(outlier_distance > 0.0))
        throw std::invalid_argument("outlier_sequence meta requires outlier_distance > 0");
    if (every < 1) throw std::invalid_argument("outlier_sequence meta requires every >= 1");
    MetaSpec s;
    s.kind = MetaKind::outlier_sequence;
    s.mu_star = base.mu_star;
    s.outlier_distance = outlier_distance;
    s.every = every;
    s.base = std::make_shared<MetaSpec>(std::move(base));
    return s;
}

Eigen::VectorXd MetaSpec::mean_of_means() const {
    switch (kind) {
        case MetaKind::symmetric:
            return mu_star;
        case MetaKind::asymmetric:
            return mu_star + kAsymOutlierWeight * kAsymShiftFactor * alpha * direction;
        case MetaKind::two_point:
            return mu_star + prob * offset;
        case MetaKind::outlier_sequence:
            return base->mean_of_means();
    }
    throw std::logic_error("mean_of_means: unhandled kind");
}

bool MetaSpec::has_closed_form_sigma_mu() const {
    return kind != MetaKind::outlier_sequence;
}

Eigen::MatrixXd MetaSpec::sigma_mu() const {
    const int d = dim();
    switch (kind) {
        case MetaKind::symmetric:
            return gamma * gamma * Eigen::MatrixXd::Identity(d, d);
        case MetaKind::asymmetric: {
            const double q = kAsymOutlierWeight;
            const Eigen::VectorXd shift = kAsymShiftFactor * alpha * direction;
            Eigen::MatrixXd cov =
                ((1.0 - q) * kAsymCoreSpread * kAsymCoreSpread +
                 q * kAsymOutlierSpread * kAsymOutlierSpread) *
                Eigen::MatrixXd::Identity(d, d);
            cov += q * (1.0 - q) * shift * shift.transpose();
            return cov;
        }
        case MetaKind::two_point:
            return prob * (1.0 - prob) * offset * offset.transpose();
        case MetaKind::outlier_sequence:
            throw std::logic_error("sigma_mu: no closed form for outlier_sequence (depends on K)");
    }
    throw std::logic_error("sigma_mu: unhandled kind");
}

const char* MetaSpec::kind_name() const {
    switch (kind) {
        case MetaKind::symmetric: return "symmetric";
        case MetaKind::asymmetric: return "asymmetric";
        case MetaKind::two_point: return "two_point";
        case MetaKind::outlier_sequence: return "outlier_sequence";
    }
    return "unknown";
}

std::vector<Eigen::VectorXd> sample_domain_means(const MetaSpec& spec, int K, std::uint64_t seed) {
    if (K < 1) throw std::invalid_argument("sample_domain_means: K must be >= 1");
    std::vector<Eigen::VectorXd> means;
    means.reserve(static_cast<std::size_t>(K));

    if (spec.kind == MetaKind::outlier_sequence) {
        Rng dir_rng(derive_seed(seed, kDirectionStream));
        const Eigen::VectorXd axis = signed_axis(spec.dim(), dir_rng);
        for (int k = 1; k <= K; ++k) {
            if (k % spec.every == 0) {
                means.push_back(spec.mu_star + spec.outlier_distance * axis);
            } else {
                Rng rng(derive_seed(seed, kMeansStream, static_cast<std::uint64_t>(k)));
                means.push_back(draw_mean(*spec.base, rng));
            }
        }
        return means;
    }

    for (int k = 1; k <= K; ++k) {
        Rng rng(derive_seed(seed, kMeansStream, static_cast<std::uint64_t>(k)));
        means.push_back(draw_mean(spec, rng));
    }
    return means;
}

std::vector<Eigen::VectorXd> outlier_sequence_means(const MetaSpec& base, double outlier_distance,
                                                    int every, int K, std::uint64_t seed) {
    return sample_domain_means(MetaSpec::OutlierSequence(base, outlier_distance, every), K, seed);
}

Domain sample_domain(const Eigen::VectorXd& mean, double sigma, int N, std::uint64_t seed,
                     int index) {
    if (N < 1) throw std::invalid_argument("sample_domain: N must be >= 1");
    if (sigma < 0.0) throw std::invalid_argument("sample_domain: sigma must be >= 0");
    Domain dom;
    dom.index = index;
    dom.mean = mean;
    dom.sigma = sigma;
    dom.samples.resize(N, mean.size());
    if (sigma == 0.0) {
        dom.samples.rowwise() = mean.transpose();
        return dom;
    }
    Rng rng(seed);
    for (int i = 0; i < N; ++i) {
        dom.samples.row(i) = (mean + sigma * rng.normal_vector(static_cast<int>(mean.size()))).transpose();
    }
    return dom;
}

Eigen::MatrixXd sigma_mu_monte_carlo(const MetaSpec& spec, int draws, std::uint64_t seed) {
    if (draws < 2) throw std::invalid_argument("sigma_mu_monte_carlo: draws must be >= 2");
    const auto means = sample_domain_means(spec, draws, seed);
    Eigen::VectorXd avg = Eigen::VectorXd::Zero(spec.dim());
    for (const auto& m : means) avg += m;
    avg /= static_cast<double>(draws);
    Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(spec.dim(), spec.dim());
    for (const auto& m : means) cov += (m - avg) * (m - avg).transpose();
    return cov / static_cast<double>(draws - 1);
}

std::vector<Domain> sample_domains(const MetaSpec& spec, int K, double sigma, int N,
                                   std::uint64_t seed) {
    const auto means = sample_domain_means(spec, K, seed);
    std::vector<Domain> domains;
    domains.reserve(means.size());
    for (int k = 1; k <= K; ++k) {
        domains.push_back(sample_domain(means[static_cast<std::size_t>(k - 1)], sigma, N,
                                        derive_seed(seed, kSamplesStream, static_cast<std::uint64_t>(k)),
                                        k));
    }
    return domains;
}

}  // namespace poolmatch
