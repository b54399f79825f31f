#pragma once

// Residuals of the pre-geodesic identities along integrated theta-flows.
//
// Second time derivatives come from a 5-point central difference of the
// stored (exact right-hand-side) velocities, so only interior samples are
// reported: two samples are dropped at each end of the uniformly spaced part
// of the trajectory.

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "igflow/connections.hpp"
#include "igflow/flows.hpp"
#include "igflow/trajectory.hpp"

namespace igflow {

/// A scalar time series, e.g. a residual per sample.
struct ResidualSeries {
    std::vector<double> times;
    std::vector<double> values;

    std::size_t size() const { return values.size(); }

    double max() const {
        double m = 0.0;
        for (double v : values) m = std::max(m, std::abs(v));
        return m;
    }

    double min() const {
        double m = std::numeric_limits<double>::infinity();
        for (double v : values) m = std::min(m, v);
        return m;
    }

    /// max |value| over samples with t in [t0, t1].
    double max_over(double t0, double t1) const {
        double m = 0.0;
        for (std::size_t n = 0; n < values.size(); ++n)
            if (times[n] >= t0 && times[n] <= t1) m = std::max(m, std::abs(values[n]));
        return m;
    }
};

/// (x[n-2] - 8 x[n-1] + 8 x[n+1] - x[n+2]) / (12 h).
template <class T>
T five_point_derivative(const std::vector<T>& x, std::size_t n, double h) {
    return (x[n - 2] - 8.0 * x[n - 1] + 8.0 * x[n + 1] - x[n + 2]) / (12.0 * h);
}

namespace detail {

/// Samples usable by the central stencil: [2, N-2) of the uniform prefix.
inline std::size_t checked_interior(const Trajectory& traj, std::string_view op) {
    if (traj.chart() != Chart::Theta)
        throw ChartError(std::string(op) + ": needs a theta-trajectory");
    const std::size_t n = traj.uniform_prefix();
    if (n < 5)
        throw InsufficientSamplesError(std::string(op) + ": need at least 5 uniformly spaced samples, have " +
                                       std::to_string(n));
    return n;
}

inline std::vector<double> speed_squared(const PotentialModel& m, const Trajectory& traj,
                                         std::size_t n) {
    std::vector<double> u2(n);
    for (std::size_t k = 0; k < n; ++k) {
        const Vec& v = traj.velocities()[k];
        u2[k] = v.dot(metric_at(m, traj.points()[k]) * v);
    }
    return u2;
}

} // namespace detail

/// ||theta'' + Gamma^(-1)i_jk theta'^j theta'^k - theta'||_inf per interior sample.
inline ResidualSeries pregeodesic_residual(const PotentialModel& m, const Trajectory& traj) {
    const std::size_t n = detail::checked_interior(traj, "pregeodesic_residual");
    const double h = traj.spacing();
    const auto& vel = traj.velocities();
    ResidualSeries out;
    for (std::size_t k = 2; k + 2 < n; ++k) {
        const Vec acc = five_point_derivative(vel, k, h);
        const Tensor3 gamma = mixture_connection(m, Point::theta(traj.points()[k]));
        const Vec r = acc + gamma.contract_lower(vel[k], vel[k]) - vel[k];
        out.times.push_back(traj.times()[k]);
        out.values.push_back(r.lpNorm<Eigen::Infinity>());
    }
    return out;
}

/// ||theta'' + Gamma~^i_jk theta'^j theta'^k - (du^2/dt - u^2 omega_j theta'^j) theta'^i / (2 u^2)||_inf
/// per interior sample, for the induced Weyl structure. u^2 = g_ij theta'^i theta'^j and
/// du^2/dt is a 5-point difference of the sampled u^2.
inline ResidualSeries weyl_pregeodesic_residual(const PotentialModel& m, const Trajectory& traj) {
    const std::size_t n = detail::checked_interior(traj, "weyl_pregeodesic_residual");
    const double h = traj.spacing();
    const auto& vel = traj.velocities();
    const std::vector<double> u2 = detail::speed_squared(m, traj, n);
    const WeylStructure weyl = induced_weyl_structure(m);
    ResidualSeries out;
    for (std::size_t k = 2; k + 2 < n; ++k) {
        const Vec& x = traj.points()[k];
        const Vec acc = five_point_derivative(vel, k, h);
        const double du2 = five_point_derivative(u2, k, h);
        const Vec omega = weyl.covector(x);
        const Tensor3 gamma = weyl_connection(weyl.metric, weyl.covector, x);
        const double factor = (du2 - u2[k] * omega.dot(vel[k])) / (2.0 * u2[k]);
        const Vec r = acc + gamma.contract_lower(vel[k], vel[k]) - factor * vel[k];
        out.times.push_back(traj.times()[k]);
        out.values.push_back(r.lpNorm<Eigen::Infinity>());
    }
    return out;
}

/// du^2/dt - u^2 omega_k x'^k per interior sample for an arbitrary Weyl
/// structure: zero exactly when the curve parameter is a proper time.
inline ResidualSeries proper_time_defect(const WeylStructure& s, const Trajectory& traj) {
    const std::size_t n = detail::checked_interior(traj, "proper_time_defect");
    const double h = traj.spacing();
    const auto& vel = traj.velocities();
    std::vector<double> u2(n);
    for (std::size_t k = 0; k < n; ++k) u2[k] = vel[k].dot(s.metric.value(traj.points()[k]) * vel[k]);
    ResidualSeries out;
    for (std::size_t k = 2; k + 2 < n; ++k) {
        const double du2 = five_point_derivative(u2, k, h);
        out.times.push_back(traj.times()[k]);
        out.values.push_back(du2 - u2[k] * s.covector(traj.points()[k]).dot(vel[k]));
    }
    return out;
}

/// The defect for the structure induced by the potential.
inline ResidualSeries proper_time_defect(const PotentialModel& m, const Trajectory& traj) {
    return proper_time_defect(induced_weyl_structure(m), traj);
}

/// du^2/dt at the interior samples (same stencil as the residuals above).
inline ResidualSeries speed_squared_rate(const PotentialModel& m, const Trajectory& traj) {
    const std::size_t n = detail::checked_interior(traj, "speed_squared_rate");
    const double h = traj.spacing();
    const std::vector<double> u2 = detail::speed_squared(m, traj, n);
    ResidualSeries out;
    for (std::size_t k = 2; k + 2 < n; ++k) {
        out.times.push_back(traj.times()[k]);
        out.values.push_back(five_point_derivative(u2, k, h));
    }
    return out;
}

/// Least-squares slope of log(residual) against log(step).
inline double loglog_slope(const std::vector<double>& steps, const std::vector<double>& residuals) {
    if (steps.size() != residuals.size() || steps.size() < 2)
        throw std::invalid_argument("loglog_slope: need at least two (step, residual) pairs");
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double n = static_cast<double>(steps.size());
    for (std::size_t k = 0; k < steps.size(); ++k) {
        const double x = std::log(steps[k]), y = std::log(residuals[k]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

} // namespace igflow
