#pragma once

// Shared generators for the property tests.

#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "igflow/igflow.hpp"

namespace igflow::test {

inline std::mt19937_64 rng(std::uint64_t seed) { return std::mt19937_64(seed); }

inline double uniform(std::mt19937_64& g, double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(g);
}

/// A random interior theta-point of a built-in model, kept away from the
/// boundary and from regions where eta saturates.
inline Vec random_theta(const PotentialModel& m, std::mt19937_64& g) {
    const std::string& n = m.name();
    if (n == "gaussian2") return vec({uniform(g, -2.0, 2.0), uniform(g, -2.0, -0.2)});
    if (n == "bernoulli") return vec({uniform(g, -4.0, 4.0)});
    if (n == "exp1d") return vec({uniform(g, -2.0, 2.0)});
    Vec x(m.dim());
    for (int i = 0; i < m.dim(); ++i) x(i) = uniform(g, -2.0, 2.0);
    return x;
}

inline std::vector<PotentialModel> builtin_models() { return ModelRegistry::builtin().models(); }

/// max |a - b| / max(1, max|b|).
inline double rel_error(const Vec& a, const Vec& b) {
    return (a - b).lpNorm<Eigen::Infinity>() / std::max(1.0, b.lpNorm<Eigen::Infinity>());
}
inline double rel_error(const Mat& a, const Mat& b) {
    return (a - b).lpNorm<Eigen::Infinity>() / std::max(1.0, b.lpNorm<Eigen::Infinity>());
}
inline double rel_error(const Tensor3& a, const Tensor3& b) {
    return (a - b).max_abs() / std::max(1.0, b.max_abs());
}

/// Hand-written log-sum-exp potential ln(1 + e^x + e^y), registered with no
/// closed-form derivatives so that every derivative goes through the FD path.
inline PotentialModel make_logsumexp2() {
    return PotentialModel(
        "logsumexp2", 2,
        [](const Vec& x) {
            const double m = std::max({0.0, x(0), x(1)});
            return m + std::log(std::exp(-m) + std::exp(x(0) - m) + std::exp(x(1) - m));
        },
        whole_space(), "θ ∈ ℝ²", Vec::Zero(2));
}

} // namespace igflow::test
