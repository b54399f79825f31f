#pragma once

// Legendre duality between the theta- and eta-charts.

#include <cmath>
#include <optional>
#include <sstream>

#include "igflow/fd.hpp"
#include "igflow/potential.hpp"

namespace igflow {

struct NewtonOptions {
    double tol = 1e-12;
    int max_iter = 100;
    int max_halvings = 30;
};

/// eta = grad Psi(theta).
inline Point to_dual(const PotentialModel& m, const Point& p) {
    require_chart(p, Chart::Theta, "to_dual");
    return Point::eta(m.grad(p.coords));
}

/// Solves grad Psi(theta) = q for theta by damped Newton iteration
/// theta <- theta + lambda * g(theta)^{-1} (q - grad Psi(theta)).
///
/// lambda starts at 1 and is halved while the trial iterate leaves the domain
/// or increases the convex merit Psi(theta) - q.theta; running out of
/// halvings on a domain exit raises DomainError.
inline Vec invert_gradient(const PotentialModel& m, const Vec& q, const Vec& guess,
                           const NewtonOptions& opt = {}) {
    if (q.size() != m.dim()) throw ChartError(m.name() + ": eta has wrong dimension");
    if (!m.in_dual_domain(q)) {
        std::ostringstream os;
        os << m.name() << ": eta (" << q.transpose() << ") outside the image of the gradient map";
        throw DomainError(os.str());
    }
    if (!m.in_domain(guess)) throw DomainError(m.name() + ": Newton guess outside domain");

    auto merit = [&](const Vec& t) { return m.eval(t) - q.dot(t); };

    Vec theta = guess;
    double f = merit(theta);
    for (int it = 0; it <= opt.max_iter; ++it) {
        const Vec r = q - m.grad(theta);
        if (r.lpNorm<Eigen::Infinity>() <= opt.tol) return theta;
        if (it == opt.max_iter) break;

        const Vec step = metric_at(m, theta).ldlt().solve(r);
        double lambda = 1.0;
        bool accepted = false;
        bool last_was_domain = false;
        for (int h = 0; h <= opt.max_halvings; ++h, lambda *= 0.5) {
            const Vec trial = theta + lambda * step;
            if (!m.in_domain(trial)) {
                last_was_domain = true;
                continue;
            }
            last_was_domain = false;
            const double ft = merit(trial);
            if (ft <= f + 1e-14 * (1.0 + std::abs(f)) || h == opt.max_halvings) {
                theta = trial;
                f = ft;
                accepted = true;
                break;
            }
        }
        if (!accepted && last_was_domain) {
            std::ostringstream os;
            os << m.name() << ": Newton iterate left the domain after " << opt.max_halvings
               << " step halvings";
            throw DomainError(os.str());
        }
    }
    std::ostringstream os;
    os << m.name() << ": Newton inversion did not reach tol " << opt.tol << " in " << opt.max_iter
       << " iterations";
    throw NonConvergenceError(os.str());
}

inline Point from_dual(const PotentialModel& m, const Point& q, const Point& guess,
                       double tol = 1e-12, int max_iter = 100) {
    require_chart(q, Chart::Eta, "from_dual");
    require_chart(guess, Chart::Theta, "from_dual guess");
    return Point::theta(invert_gradient(m, q.coords, guess.coords, {tol, max_iter}));
}

/// Inversion started from the model's reference point.
inline Point from_dual(const PotentialModel& m, const Point& q) {
    return from_dual(m, q, Point::theta(m.reference()));
}

/// Psi*(eta) = theta.eta - Psi(theta) at theta = grad Psi^{-1}(eta).
inline double dual_potential_at(const PotentialModel& m, const Vec& eta,
                                const std::optional<Vec>& guess = std::nullopt) {
    const Vec theta = invert_gradient(m, eta, guess ? *guess : m.reference());
    return theta.dot(eta) - m.eval(theta);
}

inline double dual_potential(const PotentialModel& m, const Point& q) {
    require_chart(q, Chart::Eta, "dual_potential");
    return dual_potential_at(m, q.coords);
}

/// g^{ij}(eta) as the finite-difference Hessian of Psi*. Each stencil point is
/// inverted with a Newton warm start at `theta_guess`.
inline Mat dual_metric_fd(const PotentialModel& m, const Vec& eta, const Vec& theta_guess) {
    return fd_hessian([&](const Vec& e) { return dual_potential_at(m, e, theta_guess); }, eta);
}

/// ||g^{ij}(eta) g_jk(theta) - delta^i_k||_inf with g^{ij}(eta) taken from the
/// finite-difference Hessian of the dual potential at eta = to_dual(theta).
inline double orthogonality_residual(const PotentialModel& m, const Point& p) {
    require_chart(p, Chart::Theta, "orthogonality_residual");
    const Mat g = metric(m, p);
    const Mat g_dual = dual_metric_fd(m, m.grad(p.coords), p.coords);
    return (g_dual * g - Mat::Identity(m.dim(), m.dim())).lpNorm<Eigen::Infinity>();
}

/// Same residual with g^{ij}(eta) computed as the matrix inverse of g_ij(theta).
inline double orthogonality_residual_inverse(const PotentialModel& m, const Point& p) {
    require_chart(p, Chart::Theta, "orthogonality_residual_inverse");
    const Mat g = metric(m, p);
    const Mat g_inv = inverse_metric_at(m, p.coords);
    return (g_inv * g - Mat::Identity(m.dim(), m.dim())).lpNorm<Eigen::Infinity>();
}

} // namespace igflow
