#pragma once

// Seeded random number generation with a documented, platform-stable algorithm.
//
// The engine is std::mt19937_64, whose output sequence is fully specified by
// the C++ standard, and every variate transform below is implemented here
// rather than delegated to std::*_distribution (whose algorithms are
// implementation-defined).  Identical seeds therefore produce bit-identical
// streams on every conforming platform.
//
// Independent sub-streams are derived with splitmix64, so draws for domain k
// under master seed s depend only on (s, k) and never on generation order.

#include <cmath>
#include <cstdint>
#include <random>

#include <Eigen/Dense>

namespace poolmatch {

// splitmix64 mixing step (Steele, Lea, Flood 2014).
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Derives the seed of an independent sub-stream from (seed, stream id).
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
    return splitmix64(splitmix64(seed) ^ splitmix64(stream));
}

inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
    return derive_seed(derive_seed(seed, a), b);
}

class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    // Uniform double in [0, 1) with 53 random bits.
    double uniform01() {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    // Uniform integer in [0, n), n >= 1.  Rejection keeps the law exact.
    std::uint64_t uniform_index(std::uint64_t n) {
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        std::uint64_t v = engine_();
        while (v >= limit) v = engine_();
        return v % n;
    }

    // Standard normal via Box-Muller, one cached spare per pair.
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u1 = uniform01();
        while (u1 <= 0.0) u1 = uniform01();
        const double u2 = uniform01();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double theta = 2.0 * M_PI * u2;
        spare_ = r * std::sin(theta);
        has_spare_ = true;
        return r * std::cos(theta);
    }

    Eigen::VectorXd normal_vector(int dim) {
        Eigen::VectorXd v(dim);
        for (int i = 0; i < dim; ++i) v[i] = normal();
        return v;
    }

    // Uniform direction on the unit sphere S^{d-1}.
    Eigen::VectorXd unit_vector(int dim) {
        Eigen::VectorXd v = normal_vector(dim);
        double norm = v.norm();
        while (norm == 0.0) {
            v = normal_vector(dim);
            norm = v.norm();
        }
        return v / norm;
    }

    // Uniform draw from the open ball of given radius around a center.
    Eigen::VectorXd ball_vector(const Eigen::VectorXd& center, double radius) {
        const int d = static_cast<int>(center.size());
        const Eigen::VectorXd dir = unit_vector(d);
        const double r = radius * std::pow(uniform01(), 1.0 / d);
        return center + r * dir;
    }

private:
    std::mt19937_64 engine_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace poolmatch
