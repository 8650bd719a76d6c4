#include "poolmatch/flow.hpp"

#include <cmath>
#include <stdexcept>

#include "poolmatch/rng.hpp"

namespace poolmatch {

namespace {

double certified_bound(const DiagonalAffineLayer& layer) {
    return layer.scale.cwiseAbs().maxCoeff();
}

// Operator norm of [[I, 0], [A, I]] is bounded by t/2 + sqrt(1 + t^2/4) with
// t an upper bound on |A|_op; here |A|_op <= scale * sigma_max(W) since the
// tanh derivative never exceeds 1.
double certified_bound(const AdditiveCouplingLayer& layer) {
    const double smax =
        Eigen::JacobiSVD<Eigen::MatrixXd>(layer.weights).singularValues()(0);
    const double t = std::abs(layer.scale) * smax;
    return 0.5 * t + std::sqrt(1.0 + 0.25 * t * t);
}

void validate(const DiagonalAffineLayer& layer, int dim) {
    if (layer.scale.size() != dim || layer.shift.size() != dim)
        throw std::invalid_argument("flow: diagonal layer dimension mismatch");
    for (int i = 0; i < dim; ++i)
        if (layer.scale[i] == 0.0)
            throw std::invalid_argument("flow: diagonal layer with zero scale is not invertible");
}

void validate(const AdditiveCouplingLayer& layer, int dim) {
    const long pass = layer.weights.cols();
    const long coupled = layer.weights.rows();
    if (pass < 1 || coupled < 1 || pass + coupled != dim)
        throw std::invalid_argument("flow: coupling layer split does not match dimension");
    if (layer.bias.size() != coupled)
        throw std::invalid_argument("flow: coupling layer bias size mismatch");
}

Eigen::VectorXd coupling_shift(const AdditiveCouplingLayer& layer,
                               const Eigen::Ref<const Eigen::VectorXd>& head) {
    return layer.scale * (layer.weights * head + layer.bias).array().tanh().matrix();
}

}  // namespace

Eigen::VectorXd FlowMap::forward(const Eigen::Ref<const Eigen::VectorXd>& z) const {
    if (z.size() != dim) throw std::invalid_argument("flow: input dimension mismatch");
    Eigen::VectorXd x = z;
    for (const auto& layer : layers) {
        if (const auto* diag = std::get_if<DiagonalAffineLayer>(&layer.spec)) {
            x = diag->scale.cwiseProduct(x) + diag->shift;
        } else {
            const auto& cpl = std::get<AdditiveCouplingLayer>(layer.spec);
            const long pass = cpl.weights.cols();
            x.tail(x.size() - pass) += coupling_shift(cpl, x.head(pass));
        }
    }
    return x;
}

Eigen::VectorXd FlowMap::inverse(const Eigen::Ref<const Eigen::VectorXd>& x) const {
    if (x.size() != dim) throw std::invalid_argument("flow: input dimension mismatch");
    Eigen::VectorXd z = x;
    for (auto it = layers.rbegin(); it != layers.rend(); ++it) {
        if (const auto* diag = std::get_if<DiagonalAffineLayer>(&it->spec)) {
            z = (z - diag->shift).cwiseQuotient(diag->scale);
        } else {
            const auto& cpl = std::get<AdditiveCouplingLayer>(it->spec);
            const long pass = cpl.weights.cols();
            z.tail(z.size() - pass) -= coupling_shift(cpl, z.head(pass));
        }
    }
    return z;
}

FlowMap build_flow(int dim, const std::vector<LayerSpec>& specs) {
    if (dim < 1) throw std::invalid_argument("flow: dimension must be >= 1");
    FlowMap flow;
    flow.dim = dim;
    flow.lipschitz_bound = 1.0;
    for (const auto& spec : specs) {
        FlowMap::Layer layer;
        layer.spec = spec;
        if (const auto* diag = std::get_if<DiagonalAffineLayer>(&spec)) {
            validate(*diag, dim);
            layer.bound = certified_bound(*diag);
        } else {
            const auto& cpl = std::get<AdditiveCouplingLayer>(spec);
            validate(cpl, dim);
            layer.bound = certified_bound(cpl);
        }
        flow.lipschitz_bound *= layer.bound;
        flow.layers.push_back(std::move(layer));
    }
    return flow;
}

TransportReport verify_transport(const FlowMap& flow, const Eigen::VectorXd& c_z, double tau,
                                 int sample_count, std::uint64_t seed) {
    if (!(tau > 0.0)) throw std::invalid_argument("verify_transport: tau must be > 0");
    if (sample_count < 2) throw std::invalid_argument("verify_transport: need sample_count >= 2");
    if (c_z.size() != flow.dim) throw std::invalid_argument("verify_transport: center dimension");

    Rng rng(seed);
    const Eigen::VectorXd image_center = flow.forward(c_z);

    Eigen::VectorXd mean = Eigen::VectorXd::Zero(flow.dim);
    double sum_sq = 0.0;
    for (int i = 0; i < sample_count; ++i) {
        const Eigen::VectorXd z = rng.ball_vector(c_z, tau);
        const Eigen::VectorXd x = flow.forward(z);
        mean += x;
        sum_sq += (x - image_center).squaredNorm();
    }
    mean /= static_cast<double>(sample_count);

    TransportReport report;
    report.variance_lhs = sum_sq / static_cast<double>(sample_count);
    report.variance_bound = flow.lipschitz_bound * flow.lipschitz_bound * tau * tau;
    report.mean_shift = (mean - image_center).norm();
    report.mean_bound = flow.lipschitz_bound * tau;
    report.passed = report.variance_lhs <= report.variance_bound &&
                    report.mean_shift <= report.mean_bound;
    return report;
}

}  // namespace poolmatch
