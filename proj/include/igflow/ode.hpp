#pragma once

// Explicit one-step integrators shared by the flows and by parallel transport.

#include <algorithm>
#include <cmath>
#include <functional>

#include "igflow/errors.hpp"
#include "igflow/types.hpp"

namespace igflow {

using Rhs = std::function<Vec(double t, const Vec& x)>;

inline Vec rk4_step(const Rhs& f, double t, const Vec& x, double h) {
    const Vec k1 = f(t, x);
    const Vec k2 = f(t + 0.5 * h, x + 0.5 * h * k1);
    const Vec k3 = f(t + 0.5 * h, x + 0.5 * h * k2);
    const Vec k4 = f(t + h, x + h * k3);
    return x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

struct AdaptiveTolerance {
    double rel_tol = 1e-9;
    double abs_tol = 1e-12;
    int max_substeps = 100000;
};

/// Dormand-Prince 5(4) with embedded error control, advancing x from t to
/// t + h exactly (the last substep is clipped to land on t + h).
inline Vec dp45_advance(const Rhs& f, double t, const Vec& x, double h,
                        const AdaptiveTolerance& tol) {
    static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
    static constexpr double a21 = 1.0 / 5;
    static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
    static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                            a54 = -212.0 / 729;
    static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                            a64 = 49.0 / 176, a65 = -5103.0 / 18656;
    static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                            b5 = -2187.0 / 6784, b6 = 11.0 / 84;
    static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                            e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

    const double t_end = t + h;
    double dt = h;
    Vec y = x;
    Vec k1 = f(t, y);
    for (int n = 0; n < tol.max_substeps; ++n) {
        if (t >= t_end) return y;
        dt = std::min(dt, t_end - t);
        const Vec k2 = f(t + c2 * dt, y + dt * (a21 * k1));
        const Vec k3 = f(t + c3 * dt, y + dt * (a31 * k1 + a32 * k2));
        const Vec k4 = f(t + c4 * dt, y + dt * (a41 * k1 + a42 * k2 + a43 * k3));
        const Vec k5 = f(t + c5 * dt, y + dt * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4));
        const Vec k6 =
            f(t + dt, y + dt * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5));
        const Vec y5 = y + dt * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
        const Vec k7 = f(t + dt, y5);
        const Vec err = dt * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);

        double norm = 0.0;
        for (Eigen::Index i = 0; i < y.size(); ++i) {
            const double sc = tol.abs_tol + tol.rel_tol * std::max(std::abs(y(i)), std::abs(y5(i)));
            norm = std::max(norm, std::abs(err(i)) / sc);
        }
        if (!std::isfinite(norm)) throw IntegrationError("dp45: non-finite error estimate");

        const bool last = dt >= t_end - t;
        if (norm <= 1.0) {
            t = last ? t_end : t + dt;
            y = y5;
            k1 = k7;
        }
        const double factor =
            norm == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(norm, -0.2), 0.2, 5.0);
        dt *= factor;
        if (dt < 1e-14 * std::max(1.0, std::abs(t))) throw IntegrationError("dp45: step underflow");
    }
    if (t >= t_end) return y;
    throw IntegrationError("dp45: too many substeps");
}

} // namespace igflow
