#include "poolmatch/sphere.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace poolmatch {

namespace {

constexpr double kUnitTolerance = 1e-6;

void require_unit(const Eigen::Ref<const Eigen::VectorXd>& v, const char* what) {
    if (std::abs(v.norm() - 1.0) > kUnitTolerance)
        throw std::invalid_argument(std::string(what) + ": input is not unit-norm");
}

}  // namespace

double geodesic_distance(const Eigen::Ref<const Eigen::VectorXd>& f1,
                         const Eigen::Ref<const Eigen::VectorXd>& f2) {
    if (f1.size() != f2.size())
        throw std::invalid_argument("geodesic_distance: dimension mismatch");
    require_unit(f1, "geodesic_distance");
    require_unit(f2, "geodesic_distance");
    // identical inputs are exactly at distance 0 even when their self-dot
    // rounds below 1
    if ((f1.array() == f2.array()).all()) return 0.0;
    const double dot = std::clamp(f1.dot(f2), -1.0, 1.0);
    return std::acos(dot);
}

Eigen::VectorXd ema_centroid_update(const Eigen::Ref<const Eigen::VectorXd>& c,
                                    const Eigen::Ref<const Eigen::VectorXd>& f, double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0))
        throw std::invalid_argument("ema_centroid_update: alpha must lie in (0,1)");
    require_unit(c, "ema_centroid_update");
    require_unit(f, "ema_centroid_update");
    const Eigen::VectorXd blended = alpha * c + (1.0 - alpha) * f;
    const double norm = blended.norm();
    if (norm == 0.0)
        throw DegenerateUpdateError("ema_centroid_update: blended vector is zero (antipodal inputs)");
    return blended / norm;
}

AssignResult adaptive_assign(const Eigen::Ref<const Eigen::VectorXd>& raw, Label label,
                             SphereState& state) {
    require_unit(raw, "adaptive_assign");
    // inputs pass at 1e-6; stored features are kept exactly unit-norm
    const Eigen::VectorXd f = raw / raw.norm();
    constexpr double inf = std::numeric_limits<double>::infinity();

    AssignResult result;
    result.d_plus = state.c_plus ? geodesic_distance(f, *state.c_plus) : inf;
    result.d_minus = state.c_minus ? geodesic_distance(f, *state.c_minus) : inf;
    result.tau = std::min(result.d_plus, result.d_minus);

    auto& own = (label == Label::normal) ? state.c_plus : state.c_minus;
    auto& set = (label == Label::normal) ? state.s_plus : state.s_minus;
    const double d_own = (label == Label::normal) ? result.d_plus : result.d_minus;
    const double d_other = (label == Label::normal) ? result.d_minus : result.d_plus;

    if (!own) {
        // First matched feature of this class seeds the centroid.
        own = f;
        set.push_back(f);
        result.decision =
            (label == Label::normal) ? AssignDecision::update_plus : AssignDecision::update_minus;
        return result;
    }
    if (!(d_own < d_other)) {
        result.decision = AssignDecision::skip;
        return result;
    }

    set.push_back(f);
    try {
        own = ema_centroid_update(*own, f, state.alpha);
    } catch (const DegenerateUpdateError&) {
        // Flagged degenerate pair: keep the previous centroid.
    }
    result.decision =
        (label == Label::normal) ? AssignDecision::update_plus : AssignDecision::update_minus;
    return result;
}

GeodesicLosses geodesic_losses(const SphereState& state, double lambda1, double lambda2) {
    if (!(lambda1 > 0.0) || !(lambda2 > 0.0))
        throw std::invalid_argument("geodesic_losses: lambdas must be positive");

    GeodesicLosses losses;
    const auto mean_sq = [](const std::vector<Eigen::VectorXd>& set, const Eigen::VectorXd& c) {
        double acc = 0.0;
        for (const auto& f : set) {
            const double d = geodesic_distance(f, c);
            acc += d * d;
        }
        return acc / static_cast<double>(set.size());
    };

    if (state.c_plus && !state.s_plus.empty()) {
        losses.intra += mean_sq(state.s_plus, *state.c_plus);
    } else {
        losses.notice = "intra term missing normal set; contribution zeroed";
    }
    if (state.c_minus && !state.s_minus.empty()) {
        losses.intra += mean_sq(state.s_minus, *state.c_minus);
    } else {
        losses.notice = losses.notice.empty()
                            ? "intra term missing anomaly set; contribution zeroed"
                            : losses.notice + "; anomaly set missing too";
    }

    if (state.c_plus && state.c_minus) {
        losses.inter = -geodesic_distance(*state.c_plus, *state.c_minus);
    }
    losses.total = lambda1 * losses.intra + lambda2 * losses.inter;
    return losses;
}

double softplus_gain(double delta) {
    constexpr double kGainSlope = 5.0;
    const double x = kGainSlope * delta;
    // log1p(exp(x)) without overflow.
    return x > 30.0 ? x : std::log1p(std::exp(x));
}

VacaResult vaca_reweight(const PatchTensor& patches, const Eigen::MatrixXd& class_embeddings,
                         const GainMap& gain_map, double gamma) {
    if (gamma < 0.0) throw std::invalid_argument("vaca_reweight: gamma must be >= 0");
    if (class_embeddings.cols() != 2)
        throw std::invalid_argument("vaca_reweight: class embeddings must have 2 columns");
    if (class_embeddings.rows() != patches.channels)
        throw std::invalid_argument("vaca_reweight: channel count mismatch");
    if (patches.batch < 1 || patches.patches < 1 || patches.channels < 1)
        throw std::invalid_argument("vaca_reweight: empty patch tensor");

    const long D = patches.channels;
    VacaResult result;
    result.delta.resize(D);

    // Per-channel contributions, batch-averaged:  Cbar = mean_{b,n} p .* t.
    Eigen::VectorXd c_normal = Eigen::VectorXd::Zero(D);
    Eigen::VectorXd c_anomaly = Eigen::VectorXd::Zero(D);
    const double inv_bn = 1.0 / static_cast<double>(patches.batch * patches.patches);
    for (long b = 0; b < patches.batch; ++b) {
        for (long n = 0; n < patches.patches; ++n) {
            for (long d = 0; d < D; ++d) {
                const double p = patches.at(b, n, d);
                c_normal[d] += p * class_embeddings(d, 0);
                c_anomaly[d] += p * class_embeddings(d, 1);
            }
        }
    }
    c_normal *= inv_bn;
    c_anomaly *= inv_bn;
    result.delta = (c_normal - c_anomaly).cwiseAbs();

    result.weights.resize(D);
    for (long d = 0; d < D; ++d) result.weights[d] = 1.0 + gamma * gain_map(result.delta[d]);

    result.reweighted = patches;
    if (gamma != 0.0) {
        for (long b = 0; b < patches.batch; ++b)
            for (long n = 0; n < patches.patches; ++n)
                for (long d = 0; d < D; ++d) result.reweighted.at(b, n, d) *= result.weights[d];
    }

    const Eigen::VectorXd weighted = result.delta.cwiseProduct(result.weights);
    const double mean = weighted.mean();
    result.var_disc = (weighted.array() - mean).square().mean();
    return result;
}

std::optional<int> multimodal_assign(const Eigen::Ref<const Eigen::VectorXd>& x,
                                     const ModeBank& bank) {
    if (bank.modes() == 0) throw std::invalid_argument("multimodal_assign: empty mode bank");
    if (bank.taus.size() != bank.centroids.size())
        throw std::invalid_argument("multimodal_assign: centroid/tau count mismatch");

    int hit = -1;
    for (int m = 0; m < bank.modes(); ++m) {
        const double dist = metric_eval(bank.metric, x - bank.centroids[static_cast<std::size_t>(m)]);
        if (dist < bank.taus[static_cast<std::size_t>(m)]) {
            if (hit >= 0) return std::nullopt;  // inside two balls: both fail uniqueness
            hit = m;
        }
    }
    if (hit < 0) return std::nullopt;
    return hit;
}

bool check_mode_separation(const std::vector<Eigen::VectorXd>& true_modes, const ModeBank& bank,
                           double R_max, double eps_max) {
    if (true_modes.size() < 2)
        throw std::invalid_argument("check_mode_separation: need at least 2 modes");
    if (static_cast<int>(true_modes.size()) != bank.modes())
        throw std::invalid_argument("check_mode_separation: bank/mode count mismatch");

    const double tau_max = *std::max_element(bank.taus.begin(), bank.taus.end());

    double min_gap = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < true_modes.size(); ++i)
        for (std::size_t j = i + 1; j < true_modes.size(); ++j)
            min_gap = std::min(min_gap, (true_modes[i] - true_modes[j]).norm());
    if (!(min_gap > 2.0 * (tau_max + R_max + eps_max))) return false;

    for (std::size_t m = 0; m < true_modes.size(); ++m) {
        const double eps_m = (bank.centroids[m] - true_modes[m]).norm();
        if (eps_m > eps_max) return false;
        if (bank.taus[m] < R_max + eps_m) return false;
    }
    return true;
}

}  // namespace poolmatch
