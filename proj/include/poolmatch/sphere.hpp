#pragma once

// Geometric core of feature matching on the unit hypersphere: geodesic
// distance, EMA centroid updates with projection, label-consistent adaptive
// assignment, geodesic losses, variance-aware channel reweighting, and the
// multimodal assignment rule with its separation check.

#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "poolmatch/metric.hpp"

namespace poolmatch {

// Raised when an EMA update would produce the zero vector (exactly antipodal
// inputs with alpha = 0.5); the caller keeps the previous centroid.
struct DegenerateUpdateError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// arccos of the clamped inner product; inputs must be unit within 1e-6.
double geodesic_distance(const Eigen::Ref<const Eigen::VectorXd>& f1,
                         const Eigen::Ref<const Eigen::VectorXd>& f2);

// (alpha * c + (1 - alpha) * f) projected back onto the sphere.
Eigen::VectorXd ema_centroid_update(const Eigen::Ref<const Eigen::VectorXd>& c,
                                    const Eigen::Ref<const Eigen::VectorXd>& f, double alpha);

enum class Label { normal, anomaly };
enum class AssignDecision { update_plus, update_minus, skip };

// Normal/anomaly centroids with their matched feature sets.  Centroids start
// unset; the first matched feature of a class becomes that class's centroid
// (the zero vector cannot be projected onto the sphere, so a zero init is
// realized as first-feature init).
struct SphereState {
    std::optional<Eigen::VectorXd> c_plus;
    std::optional<Eigen::VectorXd> c_minus;
    double alpha = 0.5;
    std::vector<Eigen::VectorXd> s_plus;
    std::vector<Eigen::VectorXd> s_minus;
};

struct AssignResult {
    AssignDecision decision = AssignDecision::skip;
    double d_plus = 0.0;   // geodesic distance to c_plus (inf while unset)
    double d_minus = 0.0;  // geodesic distance to c_minus (inf while unset)
    double tau = 0.0;      // adaptive radius min(d_plus, d_minus)
};

// Updates only the label-consistent centroid, and only when it is strictly
// nearest; ties and label-inconsistent geometry are skipped.  A degenerate
// EMA update is swallowed: the feature is recorded, the centroid stays put.
AssignResult adaptive_assign(const Eigen::Ref<const Eigen::VectorXd>& f, Label label,
                             SphereState& state);

struct GeodesicLosses {
    double intra = 0.0;  // mean squared geodesic spread of each matched set
    double inter = 0.0;  // negative centroid separation
    double total = 0.0;  // lambda1 * intra + lambda2 * inter
    std::string notice;  // set when a term was zeroed for lack of data
};

GeodesicLosses geodesic_losses(const SphereState& state, double lambda1, double lambda2);

// Patch embeddings, batch x patches x channels, row-major.
struct PatchTensor {
    long batch = 0, patches = 0, channels = 0;
    std::vector<double> data;

    PatchTensor() = default;
    PatchTensor(long b, long n, long d)
        : batch(b), patches(n), channels(d),
          data(static_cast<std::size_t>(b * n * d), 0.0) {}

    double& at(long b, long n, long d) {
        return data[static_cast<std::size_t>((b * patches + n) * channels + d)];
    }
    double at(long b, long n, long d) const {
        return data[static_cast<std::size_t>((b * patches + n) * channels + d)];
    }
};

using GainMap = std::function<double(double)>;

// Default gain map standing in for the learned gain network: a fixed smooth
// nonnegative monotone softplus(kGainSlope * delta) with kGainSlope = 5.
double softplus_gain(double delta);

struct VacaResult {
    Eigen::VectorXd delta;    // per-channel discriminability |Cbar_n - Cbar_a|
    Eigen::VectorXd weights;  // w = 1 + gamma * gain(delta)
    PatchTensor reweighted;   // P with each channel scaled by w
    double var_disc = 0.0;    // population variance of delta .* w
};

// class_embeddings is channels x 2 (normal, anomaly), L2-normalized columns;
// patch rows must be L2-normalized along the channel axis.  gamma = 0 leaves
// the patches bit-identical.
VacaResult vaca_reweight(const PatchTensor& patches, const Eigen::MatrixXd& class_embeddings,
                         const GainMap& gain_map, double gamma);

struct ModeBank {
    std::vector<Eigen::VectorXd> centroids;
    std::vector<double> taus;
    MetricSpec metric = MetricSpec::Euclidean();

    int modes() const { return static_cast<int>(centroids.size()); }
};

// The unique mode m with M(x - c_m) < tau_m and M(x - c_j) >= tau_j for all
// j != m; nullopt when no mode or more than one ball claims the sample.
std::optional<int> multimodal_assign(const Eigen::Ref<const Eigen::VectorXd>& x,
                                     const ModeBank& bank);

// True iff min_{i != j} |mu*_i - mu*_j| > 2 (tau_max + R_max + eps_max)
// (strict) and each mode covers its own samples: tau_m >= R_max + eps_m with
// eps_m = |c_m - mu*_m| the realized centroid error, which must also respect
// the stated budget eps_m <= eps_max.
bool check_mode_separation(const std::vector<Eigen::VectorXd>& true_modes, const ModeBank& bank,
                           double R_max, double eps_max);

}  // namespace poolmatch
