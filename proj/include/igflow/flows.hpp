#pragma once

// The two gradient-flow systems of a dually flat structure:
//
//   theta-flow  dtheta^i/dt =  g^ij(theta) dPsi/dtheta^j   (linear in eta: deta/dt = eta)
//   eta-flow    deta_i/dt   = -g_ij(eta)   dPsi*/deta_j    (linear in theta: dtheta/dt = -theta)
//
// plus the quantities evaluated along them.

#include <cmath>
#include <memory>
#include <optional>
#include <sstream>
#include <vector>

#include "igflow/connections.hpp"
#include "igflow/dual.hpp"
#include "igflow/ode.hpp"
#include "igflow/potential.hpp"
#include "igflow/trajectory.hpp"

namespace igflow {

enum class Method { RK4, DP45 };

struct FlowConfig {
    double t_end = 1.0;
    /// Fixed RK4 step, or the output spacing for DP45.
    double step = 1e-3;
    Method method = Method::RK4;
    double rel_tol = 1e-9;
    double abs_tol = 1e-12;
    double boundary_margin = 1e-6;

    void validate() const {
        if (!(step > 0.0)) throw ConfigError("flow step must be positive");
        if (!(t_end > 0.0)) throw ConfigError("flow t_end must be positive");
        if (!(boundary_margin >= 0.0)) throw ConfigError("boundary_margin must be non-negative");
        if (method == Method::DP45 && !(rel_tol > 0.0 && abs_tol > 0.0))
            throw ConfigError("adaptive tolerances must be positive");
    }
};

namespace detail {

enum class StateStatus { Ok, Domain, Singular };

struct FlowSystem {
    Chart chart;
    Rhs rhs;
    std::function<StateStatus(const Vec&)> classify;
    std::function<void(const Vec&)> on_accept = [](const Vec&) {};
};

inline Vec advance(const FlowSystem& sys, const FlowConfig& cfg, double t, const Vec& x, double h) {
    if (cfg.method == Method::RK4) return rk4_step(sys.rhs, t, x, h);
    return dp45_advance(sys.rhs, t, x, h, {cfg.rel_tol, cfg.abs_tol});
}

inline std::pair<StateStatus, Vec> try_advance(const FlowSystem& sys, const FlowConfig& cfg,
                                               double t, const Vec& x, double h) {
    try {
        Vec y = advance(sys, cfg, t, x, h);
        if (!y.allFinite()) return {StateStatus::Domain, x};
        return {sys.classify(y), y};
    } catch (const ConvexityError&) {
        return {StateStatus::Singular, x};
    } catch (const Error&) {
        return {StateStatus::Domain, x};
    }
}

/// Fixed-spacing march from 0 to cfg.t_end. A rejected trial step is bisected
/// 40 times to find the largest admissible fraction; that partial step is
/// recorded and the march stops with DomainExit or SingularMetric.
inline Trajectory integrate_system(const FlowSystem& sys, const Vec& x0, const FlowConfig& cfg) {
    cfg.validate();
    switch (sys.classify(x0)) {
    case StateStatus::Ok: break;
    case StateStatus::Domain:
        throw DomainError("initial point is outside the domain (or within the boundary margin)");
    case StateStatus::Singular: throw ConvexityError("metric is singular at the initial point");
    }

    std::vector<double> times{0.0};
    std::vector<Vec> points{x0};
    std::vector<Vec> vels{sys.rhs(0.0, x0)};
    sys.on_accept(x0);
    auto reason = TerminationReason::Completed;

    const auto n_steps = static_cast<long>(std::ceil(cfg.t_end / cfg.step - 1e-9));
    for (long n = 0; n < n_steps; ++n) {
        const double t = times.back();
        const double h = (n + 1 == n_steps) ? cfg.t_end - t : cfg.step;
        if (!(h > 0.0)) break;
        auto [status, y] = try_advance(sys, cfg, t, points.back(), h);
        if (status != StateStatus::Ok) {
            double lo = 0.0, hi = h;
            Vec best;
            StateStatus fail = status;
            for (int b = 0; b < 40; ++b) {
                const double mid = 0.5 * (lo + hi);
                auto [s, z] = try_advance(sys, cfg, t, points.back(), mid);
                if (s == StateStatus::Ok) {
                    lo = mid;
                    best = std::move(z);
                } else {
                    hi = mid;
                    fail = s;
                }
            }
            if (lo > 0.0) {
                times.push_back(t + lo);
                vels.push_back(sys.rhs(t + lo, best));
                points.push_back(std::move(best));
            }
            reason = fail == StateStatus::Singular ? TerminationReason::SingularMetric
                                                   : TerminationReason::DomainExit;
            break;
        }
        sys.on_accept(y);
        times.push_back(t + h);
        vels.push_back(sys.rhs(t + h, y));
        points.push_back(std::move(y));
    }
    return Trajectory(sys.chart, std::move(times), std::move(points), std::move(vels), reason);
}

} // namespace detail

/// Velocity of the theta-flow, g^{-1}(theta) eta(theta).
inline Vec theta_flow_velocity(const PotentialModel& m, const Vec& theta) {
    return metric_at(m, theta).ldlt().solve(m.grad(theta));
}

/// Solves dtheta/dt = g^{-1} grad Psi from theta0. Stops early with DomainExit
/// when theta or eta = grad Psi(theta) comes within boundary_margin of the
/// boundary of its chart's domain.
inline Trajectory integrate_theta_flow(const PotentialModel& m, const Point& theta0,
                                       const FlowConfig& cfg = {}) {
    require_chart(theta0, Chart::Theta, "integrate_theta_flow");
    using detail::StateStatus;
    const double margin = cfg.boundary_margin;
    detail::FlowSystem sys{
        Chart::Theta,
        [&m](double, const Vec& x) { return theta_flow_velocity(m, x); },
        [&m, margin](const Vec& x) {
            if (!m.in_domain(x, margin)) return StateStatus::Domain;
            if (!m.in_dual_domain(m.grad(x), margin)) return StateStatus::Domain;
            try {
                check_positive_definite(m.hess(x));
            } catch (const ConvexityError&) {
                return StateStatus::Singular;
            }
            return StateStatus::Ok;
        }};
    return detail::integrate_system(sys, theta0.coords, cfg);
}

/// Solves deta/dt = -g(eta) theta(eta) from eta0, with theta(eta) from Newton
/// inversion (warm-started at the last accepted state) and g(eta) = g(theta(eta)).
inline Trajectory integrate_eta_flow(const PotentialModel& m, const Point& eta0,
                                     const FlowConfig& cfg = {}) {
    require_chart(eta0, Chart::Eta, "integrate_eta_flow");
    using detail::StateStatus;
    const double margin = cfg.boundary_margin;
    auto guess = std::make_shared<Vec>(m.reference());
    auto theta_of = [&m, guess](const Vec& eta) { return invert_gradient(m, eta, *guess); };
    detail::FlowSystem sys{
        Chart::Eta,
        [&m, theta_of](double, const Vec& eta) -> Vec {
            const Vec theta = theta_of(eta);
            return -(metric_at(m, theta) * theta);
        },
        [&m, theta_of, margin](const Vec& eta) {
            if (!m.in_dual_domain(eta, margin)) return StateStatus::Domain;
            Vec theta;
            try {
                theta = theta_of(eta);
            } catch (const ConvexityError&) {
                return StateStatus::Singular;
            } catch (const Error&) {
                return StateStatus::Domain;
            }
            if (!m.in_domain(theta, margin)) return StateStatus::Domain;
            try {
                check_positive_definite(m.hess(theta));
            } catch (const ConvexityError&) {
                return StateStatus::Singular;
            }
            return StateStatus::Ok;
        },
        [theta_of, guess](const Vec& eta) { *guess = theta_of(eta); }};
    return detail::integrate_system(sys, eta0.coords, cfg);
}

/// q0 * e^(sign t): the linear solution in the dual chart.
inline Vec closed_form_dual_flow(const Vec& q0, double t, int sign) {
    if (sign != 1 && sign != -1) throw std::invalid_argument("closed_form_dual_flow: sign must be +1 or -1");
    return q0 * std::exp(sign * t);
}

/// The points of `traj` mapped to the other chart: eta = grad Psi(theta) for
/// a theta-trajectory, theta = (grad Psi)^{-1}(eta) for an eta-trajectory.
inline std::vector<Vec> dual_image(const PotentialModel& m, const Trajectory& traj) {
    std::vector<Vec> out;
    out.reserve(traj.size());
    Vec guess = m.reference();
    for (const Vec& x : traj.points()) {
        if (traj.chart() == Chart::Theta) {
            out.push_back(m.grad(x));
        } else {
            guess = invert_gradient(m, x, guess);
            out.push_back(guess);
        }
    }
    return out;
}

/// Each term -Q^k P_k = q_{2k} / q_{2k-1} (1-based) of the gradient-flow
/// Hamiltonian, with Q^k = q_{2k} and P_k = -1/q_{2k-1}.
inline Vec hamiltonian_terms(const Vec& q) {
    if (q.size() == 0 || q.size() % 2 != 0)
        throw ChartError("hamiltonian: coordinate dimension must be even");
    Vec terms(q.size() / 2);
    for (Eigen::Index k = 0; k < terms.size(); ++k) {
        const double denom = q(2 * k);
        if (denom == 0.0) {
            std::ostringstream os;
            os << "hamiltonian: momentum P_" << k + 1 << " undefined (coordinate " << 2 * k + 1
               << " is zero)";
            throw DivisionByZeroError(os.str());
        }
        terms(k) = q(2 * k + 1) / denom;
    }
    return terms;
}

/// H = -sum_k Q^k P_k = sum_k q_{2k} / q_{2k-1}.
inline double hamiltonian(const Vec& q) { return hamiltonian_terms(q).sum(); }

/// |dPsi/dt - eta^2(theta)| per sample of a theta-flow, with dPsi/dt = eta_i
/// dtheta^i/dt from the stored velocities.
inline std::vector<double> potential_rate_residual(const PotentialModel& m, const Trajectory& traj) {
    if (traj.chart() != Chart::Theta) throw ChartError("potential_rate_residual: needs a theta-trajectory");
    std::vector<double> out;
    out.reserve(traj.size());
    for (std::size_t n = 0; n < traj.size(); ++n) {
        const Vec& x = traj.points()[n];
        const double rate = m.grad(x).dot(traj.velocities()[n]);
        out.push_back(std::abs(rate - eta_squared_at(m, x)));
    }
    return out;
}

/// |-dPsi*/dt - theta^2(eta)| per sample of an eta-flow, with
/// -dPsi*/dt = -theta^i deta_i/dt and theta^2 = g_ij theta^i theta^j.
inline std::vector<double> entropy_rate_residual(const PotentialModel& m, const Trajectory& traj) {
    if (traj.chart() != Chart::Eta) throw ChartError("entropy_rate_residual: needs an eta-trajectory");
    const std::vector<Vec> thetas = dual_image(m, traj);
    std::vector<double> out;
    out.reserve(traj.size());
    for (std::size_t n = 0; n < traj.size(); ++n) {
        const Vec& th = thetas[n];
        const double rate = -th.dot(traj.velocities()[n]);
        const double theta2 = th.dot(metric_at(m, th) * th);
        out.push_back(std::abs(rate - theta2));
    }
    return out;
}

} // namespace igflow
