#pragma once

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "igflow/potential.hpp"

namespace igflow {

/// Psi = 1/2 |theta|^2 on R^d. Self-dual; flat metric.
inline PotentialModel make_quadratic(int dim) {
    std::string name = "quadratic" + std::to_string(dim);
    std::string desc = "θ ∈ ℝ^" + std::to_string(dim);
    return PotentialModel(name, dim, [](const Vec& t) { return 0.5 * t.squaredNorm(); },
                          whole_space(), desc, Vec::Zero(dim))
        .with_gradient([](const Vec& t) -> Vec { return t; })
        .with_hessian([dim](const Vec&) -> Mat { return Mat::Identity(dim, dim); })
        .with_third([dim](const Vec&) { return Tensor3(dim); });
}

/// Psi = exp(theta) on R; eta in (0, inf).
inline PotentialModel make_exp1d() {
    return PotentialModel("exp1d", 1, [](const Vec& t) { return std::exp(t(0)); }, whole_space(),
                          "θ ∈ ℝ", Vec::Zero(1))
        .with_gradient([](const Vec& t) -> Vec { return Vec::Constant(1, std::exp(t(0))); })
        .with_hessian([](const Vec& t) -> Mat { return Mat::Constant(1, 1, std::exp(t(0))); })
        .with_third([](const Vec& t) { return Tensor3(1, std::exp(t(0))); })
        .with_dual_domain([](const Vec& e) { return e(0); });
}

namespace detail {
inline double logistic(double x) {
    return x >= 0.0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x));
}
inline double softplus(double x) {
    return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}
} // namespace detail

/// Psi = ln(1 + e^theta), the Bernoulli log-partition; eta in (0, 1).
inline PotentialModel make_bernoulli() {
    using detail::logistic;
    return PotentialModel("bernoulli", 1, [](const Vec& t) { return detail::softplus(t(0)); },
                          whole_space(), "θ ∈ ℝ, η ∈ (0,1)", Vec::Zero(1))
        .with_gradient([](const Vec& t) -> Vec { return Vec::Constant(1, logistic(t(0))); })
        .with_hessian([](const Vec& t) -> Mat {
            const double s = logistic(t(0));
            return Mat::Constant(1, 1, s * (1.0 - s));
        })
        .with_third([](const Vec& t) {
            const double s = logistic(t(0));
            return Tensor3(1, s * (1.0 - s) * (1.0 - 2.0 * s));
        })
        .with_dual_domain([](const Vec& e) { return std::min(e(0), 1.0 - e(0)); });
}

/// Univariate Gaussian log-partition in natural parameters
/// theta = (mu/sigma^2, -1/(2 sigma^2)):
///   Psi = -theta1^2 / (4 theta2) - 1/2 ln(-2 theta2),  theta2 < 0.
/// eta = (mu, mu^2 + sigma^2), so the eta-domain is eta2 > eta1^2.
inline PotentialModel make_gaussian2() {
    auto eval = [](const Vec& t) {
        const double a = t(0), b = t(1);
        return -a * a / (4.0 * b) - 0.5 * std::log(-2.0 * b);
    };
    return PotentialModel("gaussian2", 2, eval, [](const Vec& t) { return -t(1); }, "θ₂<0",
                          vec({0.0, -0.5}))
        .with_gradient([](const Vec& t) -> Vec {
            const double a = t(0), b = t(1);
            return vec({-a / (2.0 * b), a * a / (4.0 * b * b) - 1.0 / (2.0 * b)});
        })
        .with_hessian([](const Vec& t) -> Mat {
            const double a = t(0), b = t(1);
            Mat g(2, 2);
            g(0, 0) = -1.0 / (2.0 * b);
            g(0, 1) = g(1, 0) = a / (2.0 * b * b);
            g(1, 1) = -a * a / (2.0 * b * b * b) + 1.0 / (2.0 * b * b);
            return g;
        })
        .with_third([](const Vec& t) {
            const double a = t(0), b = t(1);
            const double b2 = b * b, b3 = b2 * b, b4 = b2 * b2;
            Tensor3 c(2);
            c(0, 0, 0) = 0.0;
            c(0, 0, 1) = c(0, 1, 0) = c(1, 0, 0) = 1.0 / (2.0 * b2);
            c(0, 1, 1) = c(1, 0, 1) = c(1, 1, 0) = -a / b3;
            c(1, 1, 1) = 3.0 * a * a / (2.0 * b4) - 1.0 / b3;
            return c;
        })
        .with_dual_domain([](const Vec& e) { return e(1) - e(0) * e(0); });
}

/// Name-indexed catalog of potentials: the four built-ins plus anything
/// registered through the library API.
class ModelRegistry {
public:
    static ModelRegistry builtin() {
        ModelRegistry r;
        r.models_ = {make_quadratic(2), make_exp1d(), make_bernoulli(), make_gaussian2()};
        return r;
    }

    /// Adds or replaces a model by name.
    void add(PotentialModel m) {
        auto it = std::find_if(models_.begin(), models_.end(),
                               [&](const PotentialModel& x) { return x.name() == m.name(); });
        if (it != models_.end())
            *it = std::move(m);
        else
            models_.push_back(std::move(m));
    }

    const PotentialModel* find(std::string_view name) const {
        for (const auto& m : models_)
            if (m.name() == name) return &m;
        return nullptr;
    }

    const std::vector<PotentialModel>& models() const { return models_; }

private:
    std::vector<PotentialModel> models_;
};

/// One line per model: "name (dim d, domain)".
inline std::string list_models(const ModelRegistry& r) {
    std::ostringstream os;
    for (const auto& m : r.models())
        os << m.name() << " (dim " << m.dim() << ", " << m.domain_description() << ")\n";
    return os.str();
}

} // namespace igflow
