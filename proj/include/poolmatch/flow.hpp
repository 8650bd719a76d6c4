#pragma once

// Layered bijective maps with certified per-layer operator-norm bounds, and
// the randomized audit of the transport guarantees: pushing a tau-ball
// through a map with Lipschitz bound L_T keeps the mean squared spread within
// L_T^2 tau^2 and the mean shift within L_T tau.
//
// Two layer families, both with closed-form certified bounds:
//   diagonal affine   y = a .* x + b          C = max |a_i|, invertible iff all a_i != 0
//   additive coupling y1 = x1,
//                     y2 = x2 + s tanh(W x1 + b)
//                     with t = s * sigma_max(W):  C = t/2 + sqrt(1 + t^2/4)

#include <cstdint>
#include <variant>
#include <vector>

#include <Eigen/Dense>

namespace poolmatch {

struct DiagonalAffineLayer {
    Eigen::VectorXd scale;  // all entries nonzero
    Eigen::VectorXd shift;
};

struct AdditiveCouplingLayer {
    // Acts on dimension scale.size() + W.rows(); the first block passes
    // through and drives the shift of the second.
    Eigen::MatrixXd weights;  // rows = coupled dims, cols = pass-through dims
    Eigen::VectorXd bias;     // size = coupled dims
    double scale = 1.0;       // bound on the shift network's gain
};

using LayerSpec = std::variant<DiagonalAffineLayer, AdditiveCouplingLayer>;

struct FlowMap {
    struct Layer {
        LayerSpec spec;
        double bound = 1.0;  // certified operator-norm bound C_l
    };
    int dim = 0;
    std::vector<Layer> layers;
    double lipschitz_bound = 1.0;  // product of the stored per-layer bounds

    Eigen::VectorXd forward(const Eigen::Ref<const Eigen::VectorXd>& z) const;
    Eigen::VectorXd inverse(const Eigen::Ref<const Eigen::VectorXd>& x) const;
};

// Empty list builds the identity flow with bound 1.  Throws on a
// non-invertible layer (zero diagonal scale) or dimension mismatch.
FlowMap build_flow(int dim, const std::vector<LayerSpec>& specs);

struct TransportReport {
    double variance_lhs = 0.0;   // mean squared distance of pushed samples to T(c_z)
    double variance_bound = 0.0; // L_T^2 tau^2
    double mean_shift = 0.0;     // | mean of pushed samples - T(c_z) |
    double mean_bound = 0.0;     // L_T tau
    bool passed = false;
};

// Samples uniformly in the open tau-ball around c_z, pushes the set through
// the flow, and checks both inequalities with no tolerance.
TransportReport verify_transport(const FlowMap& flow, const Eigen::VectorXd& c_z, double tau,
                                 int sample_count, std::uint64_t seed);

}  // namespace poolmatch
