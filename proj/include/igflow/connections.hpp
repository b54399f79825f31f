#pragma once

// Connection coefficient fields on the theta-chart: Levi-Civita, the alpha
// family, the mixture connection, and the Weyl integrable structure
// (g, omega_k = -d_k ln eta^2) induced by a potential.

#include <cmath>
#include <sstream>
#include <string_view>
#include <vector>

#include "igflow/fd.hpp"
#include "igflow/ode.hpp"
#include "igflow/potential.hpp"
#include "igflow/tensor3.hpp"
#include "igflow/trajectory.hpp"

namespace igflow {

/// eta^2 below this raises SingularWeylError.
inline constexpr double kWeylSingularity = 1e-8;

/// A metric field with its first partials: derivative(x)[k](i, j) = d_k g_ij.
struct MetricField {
    int dim = 0;
    MatrixField value;
    std::function<std::vector<Mat>(const Vec&)> derivative;
};

/// The Hessian metric of a potential; d_k g_ij = C_ijk exactly.
inline MetricField metric_field(const PotentialModel& m) {
    return {m.dim(), [m](const Vec& x) { return metric_at(m, x); },
            [m](const Vec& x) {
                const Tensor3 c = m.third(x);
                std::vector<Mat> d;
                for (int k = 0; k < c.dim(); ++k) d.push_back(c.slice(k));
                return d;
            }};
}

/// A metric known only by value; partials come from central differences.
inline MetricField metric_field_fd(int dim, MatrixField g) {
    auto d = [g](const Vec& x) { return fd_matrix_derivative(g, x); };
    return {dim, std::move(g), std::move(d)};
}

/// Christoffel symbols of the second kind,
/// Gamma^i_jk = 1/2 g^il (d_j g_lk + d_k g_jl - d_l g_jk).
inline Tensor3 levi_civita(const MetricField& g, const Vec& x) {
    const int n = g.dim;
    const Mat gm = g.value(x);
    const Mat g_inv = gm.ldlt().solve(Mat::Identity(n, n));
    const std::vector<Mat> dg = g.derivative(x);
    Tensor3 lower(n); // Gamma_ljk
    for (int l = 0; l < n; ++l)
        for (int j = 0; j < n; ++j)
            for (int k = 0; k < n; ++k)
                lower(l, j, k) = 0.5 * (dg[j](l, k) + dg[k](j, l) - dg[l](j, k));
    return lower.contract_first(g_inv);
}

inline Tensor3 levi_civita(const PotentialModel& m, const Point& p) {
    require_chart(p, Chart::Theta, "levi_civita");
    return levi_civita(metric_field(m), p.coords);
}

/// Lower-index alpha-connection Gamma^(alpha)_ijk = (1 - alpha)/2 C_ijk.
inline Tensor3 alpha_connection(const PotentialModel& m, const Point& p, double alpha) {
    require_chart(p, Chart::Theta, "alpha_connection");
    return (0.5 * (1.0 - alpha)) * m.third(p.coords);
}

/// g^il C_ljk before symmetrisation in (j, k).
inline Tensor3 mixture_connection_raw(const PotentialModel& m, const Vec& x) {
    return m.third(x).contract_first(inverse_metric_at(m, x));
}

/// Mixture connection Gamma^(-1)i_jk = g^il d_k g_lj = g^il C_ljk, symmetrised
/// in (j, k).
inline Tensor3 mixture_connection(const PotentialModel& m, const Point& p) {
    require_chart(p, Chart::Theta, "mixture_connection");
    return mixture_connection_raw(m, p.coords).symmetrized_lower();
}

/// How far g^il d_k g_lj is from symmetric in (j, k); nonzero only through
/// finite-difference noise in the cubic tensor.
inline double mixture_symmetry_defect(const PotentialModel& m, const Point& p) {
    require_chart(p, Chart::Theta, "mixture_symmetry_defect");
    return mixture_connection_raw(m, p.coords).lower_symmetry_defect();
}

/// eta^2(theta) = g^ij eta_i eta_j.
inline double eta_squared_at(const PotentialModel& m, const Vec& x) {
    const Vec eta = m.grad(x);
    return eta.dot(metric_at(m, x).ldlt().solve(eta));
}

inline double eta_squared(const PotentialModel& m, const Point& p) {
    require_chart(p, Chart::Theta, "eta_squared");
    return eta_squared_at(m, p.coords);
}

/// d_k eta^2 = 2 eta_i g^ij d_k eta_j + eta_i eta_j d_k g^ij
///           = 2 eta_k - u^T C_k u, with u = g^{-1} eta.
inline Vec eta_squared_gradient_at(const PotentialModel& m, const Vec& x) {
    const Vec eta = m.grad(x);
    const Vec u = metric_at(m, x).ldlt().solve(eta);
    const Tensor3 c = m.third(x);
    Vec d = 2.0 * eta;
    for (int k = 0; k < m.dim(); ++k) d(k) -= u.dot(c.slice(k) * u);
    return d;
}

/// omega_k = -d_k ln eta^2 = -(d_k eta^2) / eta^2.
inline Vec weyl_covector_at(const PotentialModel& m, const Vec& x) {
    const double e2 = eta_squared_at(m, x);
    if (!(e2 > kWeylSingularity)) {
        std::ostringstream os;
        os << m.name() << ": eta^2 = " << e2 << " at (" << x.transpose()
           << ") is below the Weyl singularity threshold";
        throw SingularWeylError(os.str());
    }
    return -eta_squared_gradient_at(m, x) / e2;
}

inline Vec weyl_covector(const PotentialModel& m, const Point& p) {
    require_chart(p, Chart::Theta, "weyl_covector");
    return weyl_covector_at(m, p.coords);
}

/// Metric, Weyl covector, and the scalar whose differential is the covector.
struct WeylStructure {
    MetricField metric;
    CovectorField covector;
    ScalarField oneform_potential;
};

/// (g, omega = -d ln eta^2) with oneform potential -ln eta^2.
inline WeylStructure induced_weyl_structure(const PotentialModel& m) {
    return {metric_field(m), [m](const Vec& x) { return weyl_covector_at(m, x); },
            [m](const Vec& x) { return -std::log(eta_squared_at(m, x)); }};
}

/// The Riemannian case omega = 0.
inline WeylStructure riemann_structure(MetricField g) {
    const int n = g.dim;
    return {std::move(g), [n](const Vec&) -> Vec { return Vec::Zero(n); },
            [](const Vec&) { return 0.0; }};
}

/// Weyl connection
/// Gamma~^k_ij = Gamma^k_ij - 1/2 (omega_i delta^k_j + omega_j delta^k_i - omega^k g_ij).
inline Tensor3 weyl_connection(const MetricField& g, const CovectorField& omega, const Vec& x) {
    const int n = g.dim;
    const Mat gm = g.value(x);
    const Vec w = omega(x);
    const Vec w_up = gm.ldlt().solve(w);
    Tensor3 out = levi_civita(g, x);
    for (int k = 0; k < n; ++k)
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                const double corr =
                    (k == j ? w(i) : 0.0) + (k == i ? w(j) : 0.0) - w_up(k) * gm(i, j);
                out(k, i, j) -= 0.5 * corr;
            }
    return out;
}

inline Tensor3 weyl_connection(const WeylStructure& s, const Vec& x) {
    return weyl_connection(s.metric, s.covector, x);
}

/// ||d_k g_ij - Gamma~^l_ki g_lj - Gamma~^l_kj g_il - omega_k g_ij||_inf,
/// i.e. the failure of nabla~_k g_ij = omega_k g_ij.
inline double nonmetricity_residual(const MetricField& g, const Tensor3& gamma, const Vec& omega,
                                    const Vec& x) {
    const int n = g.dim;
    const Mat gm = g.value(x);
    const std::vector<Mat> dg = g.derivative(x);
    double r = 0.0;
    for (int k = 0; k < n; ++k)
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                double cov = dg[k](i, j);
                for (int l = 0; l < n; ++l)
                    cov -= gamma(l, k, i) * gm(l, j) + gamma(l, k, j) * gm(i, l);
                r = std::max(r, std::abs(cov - omega(k) * gm(i, j)));
            }
    return r;
}

struct GaugedValues {
    Mat metric;
    Vec covector;
};

/// g -> e^Lambda g, omega -> omega + d Lambda at one point; d Lambda by
/// first-order central differences.
inline GaugedValues gauge_transform(const MetricField& g, const CovectorField& omega,
                                    const ScalarField& lambda, const Vec& x) {
    const double el = std::exp(lambda(x));
    return {el * g.value(x), omega(x) + fd_gradient(lambda, x)};
}

/// Field-level gauge transform. The transformed metric's partials follow the
/// product rule d(e^L g) = e^L (dL g + dg).
inline WeylStructure gauge_transform(const WeylStructure& s, ScalarField lambda) {
    const int n = s.metric.dim;
    MetricField g{n,
                  [g0 = s.metric, lambda](const Vec& x) -> Mat {
                      return std::exp(lambda(x)) * g0.value(x);
                  },
                  [g0 = s.metric, lambda](const Vec& x) {
                      const double el = std::exp(lambda(x));
                      const Vec dl = fd_gradient(lambda, x);
                      const Mat gx = g0.value(x);
                      std::vector<Mat> d = g0.derivative(x);
                      for (int k = 0; k < static_cast<int>(d.size()); ++k)
                          d[static_cast<std::size_t>(k)] = el * (dl(k) * gx + d[static_cast<std::size_t>(k)]);
                      return d;
                  }};
    CovectorField w = [w0 = s.covector, lambda](const Vec& x) -> Vec {
        return w0(x) + fd_gradient(lambda, x);
    };
    ScalarField phi = [p0 = s.oneform_potential, lambda](const Vec& x) {
        return p0(x) + lambda(x);
    };
    return {std::move(g), std::move(w), std::move(phi)};
}

/// The conformal metric eta^2 g, with finite-difference partials. Its
/// Levi-Civita connection is an independent route to the induced Weyl
/// connection.
inline MetricField conformal_metric_field(const PotentialModel& m) {
    return metric_field_fd(m.dim(), [m](const Vec& x) -> Mat {
        return eta_squared_at(m, x) * metric_at(m, x);
    });
}

enum class ConnectionKind { LeviCivita, Alpha, Mixture, Weyl, ConformalLC };

/// Coefficients Gamma^i_jk as a function of the theta-chart point.
struct ConnectionField {
    int dim = 0;
    ConnectionKind kind = ConnectionKind::LeviCivita;
    double alpha = 0.0; // meaningful for Alpha only
    std::function<Tensor3(const Vec&)> coeffs_at;
};

inline ConnectionField levi_civita_field(const PotentialModel& m) {
    return {m.dim(), ConnectionKind::LeviCivita, 0.0,
            [g = metric_field(m)](const Vec& x) { return levi_civita(g, x); }};
}

/// Alpha-connection with its first index raised by g^{-1}.
inline ConnectionField alpha_field(const PotentialModel& m, double alpha) {
    return {m.dim(), ConnectionKind::Alpha, alpha, [m, alpha](const Vec& x) {
                return (0.5 * (1.0 - alpha)) * m.third(x).contract_first(inverse_metric_at(m, x));
            }};
}

inline ConnectionField mixture_field(const PotentialModel& m) {
    return {m.dim(), ConnectionKind::Mixture, -1.0,
            [m](const Vec& x) { return mixture_connection_raw(m, x).symmetrized_lower(); }};
}

inline ConnectionField weyl_field(WeylStructure s) {
    const int n = s.metric.dim;
    return {n, ConnectionKind::Weyl, 0.0,
            [s = std::move(s)](const Vec& x) { return weyl_connection(s, x); }};
}

inline ConnectionField conformal_lc_field(const PotentialModel& m) {
    return {m.dim(), ConnectionKind::ConformalLC, 0.0,
            [g = conformal_metric_field(m)](const Vec& x) { return levi_civita(g, x); }};
}

/// Integrates dV^i/dtau + Gamma^i_jk xdot^j V^k = 0 along a sampled curve with
/// classical RK4, one step per sample interval. Curve position and velocity
/// between samples come from cubic Hermite interpolation. Returns V at every
/// curve sample.
inline std::vector<Vec> parallel_transport(const ConnectionField& gamma, const Trajectory& curve,
                                           const Vec& v0) {
    if (v0.size() != gamma.dim || curve.dim() != gamma.dim)
        throw ChartError("parallel_transport: dimension mismatch");
    if (curve.size() == 0) throw IntegrationError("parallel_transport: empty curve");

    std::vector<Vec> out;
    out.reserve(curve.size());
    out.push_back(v0);
    std::size_t segment = 0;
    const auto& t = curve.times();
    const Rhs rhs = [&](double tau, const Vec& v) -> Vec {
        const double s = (tau - t[segment]) / (t[segment + 1] - t[segment]);
        const auto [x, xdot] = hermite(curve, segment, std::clamp(s, 0.0, 1.0));
        return -gamma.coeffs_at(x).contract_lower(xdot, v);
    };
    for (segment = 0; segment + 1 < curve.size(); ++segment) {
        const Vec next = rk4_step(rhs, t[segment], out.back(), t[segment + 1] - t[segment]);
        if (!next.allFinite()) throw IntegrationError("parallel_transport: non-finite state");
        out.push_back(next);
    }
    return out;
}

} // namespace igflow
