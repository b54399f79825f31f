#pragma once

// Fourth-order-accurate central finite differences up to third order.
//
// Every partial derivative is built as a tensor product of one-dimensional
// central stencils, one per distinct axis, so mixed partials that differ only
// by index order share a single evaluation and come out exactly symmetric.

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <optional>
#include <variant>
#include <vector>

#include "igflow/tensor3.hpp"
#include "igflow/types.hpp"

namespace igflow {

/// Default step for a central difference of the given order:
/// eps^(1/(order+4)) balances O(h^4) truncation against O(eps/h^order)
/// round-off for unit-scale features; the factor 1/4 accounts for potentials
/// that curve on scales of a few tenths (e.g. near a singular boundary).
/// Steps are absolute, not scaled by |x|: the dual potential varies on the
/// scale of eta2 - eta1^2 even where |eta| is large.
inline double fd_base_step(int order) {
    return 0.25 * std::pow(std::numeric_limits<double>::epsilon(), 1.0 / (order + 4));
}

namespace detail {

struct Stencil1D {
    std::vector<int> offsets;
    std::vector<double> weights; // unit-step weights; divide by h^multiplicity
};

inline const Stencil1D& central_stencil(int multiplicity) {
    static const std::array<Stencil1D, 3> table{{
        {{-2, -1, 1, 2}, {1.0 / 12, -8.0 / 12, 8.0 / 12, -1.0 / 12}},
        {{-2, -1, 0, 1, 2}, {-1.0 / 12, 16.0 / 12, -30.0 / 12, 16.0 / 12, -1.0 / 12}},
        {{-3, -2, -1, 1, 2, 3}, {1.0 / 8, -1.0, 13.0 / 8, -13.0 / 8, 1.0, -1.0 / 8}},
    }};
    return table.at(static_cast<std::size_t>(multiplicity - 1));
}

/// Partial derivative of f along the multiset `axes` (sorted), each axis
/// using its own step h[axis].
inline double mixed_partial(const ScalarField& f, const Vec& x, std::vector<int> axes,
                            const Vec& h) {
    std::sort(axes.begin(), axes.end());
    std::vector<std::pair<int, int>> groups; // (axis, multiplicity)
    for (int a : axes) {
        if (!groups.empty() && groups.back().first == a)
            ++groups.back().second;
        else
            groups.emplace_back(a, 1);
    }

    std::vector<std::size_t> cursor(groups.size(), 0);
    double acc = 0.0;
    while (true) {
        Vec y = x;
        double w = 1.0;
        for (std::size_t g = 0; g < groups.size(); ++g) {
            const auto& st = central_stencil(groups[g].second);
            const int axis = groups[g].first;
            y(axis) += st.offsets[cursor[g]] * h(axis);
            w *= st.weights[cursor[g]];
        }
        acc += w * f(y);

        std::size_t g = 0;
        for (; g < groups.size(); ++g) {
            if (++cursor[g] < central_stencil(groups[g].second).offsets.size()) break;
            cursor[g] = 0;
        }
        if (g == groups.size()) break;
    }

    double denom = 1.0;
    for (const auto& [axis, m] : groups) denom *= std::pow(h(axis), m);
    return acc / denom;
}

inline Vec fd_steps(const Vec& x, int order, std::optional<double> step) {
    return Vec::Constant(x.size(), step ? *step : fd_base_step(order));
}

} // namespace detail

/// First partials. `step`, when given, is used as-is on every axis; otherwise
/// the scaled default step is used.
inline Vec fd_gradient(const ScalarField& f, const Vec& x, std::optional<double> step = {}) {
    const Vec h = detail::fd_steps(x, 1, step);
    Vec out(x.size());
    for (int i = 0; i < x.size(); ++i) out(i) = detail::mixed_partial(f, x, {i}, h);
    return out;
}

inline Mat fd_hessian(const ScalarField& f, const Vec& x, std::optional<double> step = {}) {
    const Vec h = detail::fd_steps(x, 2, step);
    const int n = static_cast<int>(x.size());
    Mat out(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) out(i, j) = out(j, i) = detail::mixed_partial(f, x, {i, j}, h);
    return out;
}

inline Tensor3 fd_third(const ScalarField& f, const Vec& x, std::optional<double> step = {}) {
    const Vec h = detail::fd_steps(x, 3, step);
    const int n = static_cast<int>(x.size());
    Tensor3 out(n);
    for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j)
            for (int k = j; k < n; ++k) {
                const double d = detail::mixed_partial(f, x, {i, j, k}, h);
                out(i, j, k) = out(i, k, j) = out(j, i, k) = d;
                out(j, k, i) = out(k, i, j) = out(k, j, i) = d;
            }
    return out;
}

namespace detail {

/// d/dx^k of a vector- or matrix-valued field with the first-order stencil.
template <class T, class F>
T first_difference(const F& f, const Vec& x, int k, double h) {
    const auto& st = central_stencil(1);
    T acc;
    for (std::size_t n = 0; n < st.offsets.size(); ++n) {
        Vec y = x;
        y(k) += st.offsets[n] * h;
        const T v = f(y);
        acc = n == 0 ? T(st.weights[n] * v) : T(acc + st.weights[n] * v);
    }
    return acc / h;
}

} // namespace detail

/// Jacobian of a vector field by central differences; column k holds d/dx^k.
inline Mat fd_jacobian(const CovectorField& f, const Vec& x, std::optional<double> step = {}) {
    const Vec h = detail::fd_steps(x, 1, step);
    Mat out;
    for (int k = 0; k < x.size(); ++k) {
        const Vec col = detail::first_difference<Vec>(f, x, k, h(k));
        if (k == 0) out.resize(col.size(), x.size());
        out.col(k) = col;
    }
    return out;
}

/// d/dx^k of a matrix field by central differences, one matrix per k.
inline std::vector<Mat> fd_matrix_derivative(const MatrixField& f, const Vec& x,
                                             std::optional<double> step = {}) {
    const Vec h = detail::fd_steps(x, 1, step);
    std::vector<Mat> out;
    out.reserve(static_cast<std::size_t>(x.size()));
    for (int k = 0; k < x.size(); ++k) out.push_back(detail::first_difference<Mat>(f, x, k, h(k)));
    return out;
}

using FdArray = std::variant<Vec, Mat, Tensor3>;

/// Derivative array of order 1 (vector), 2 (matrix) or 3 (rank-3 array).
/// Domain errors raised by `f` on stencil points propagate unchanged.
inline FdArray fd_differentiate(const ScalarField& f, const Vec& x, int order,
                                std::optional<double> step = {}) {
    switch (order) {
    case 1:
        return fd_gradient(f, x, step);
    case 2:
        return fd_hessian(f, x, step);
    case 3:
        return fd_third(f, x, step);
    default:
        throw std::invalid_argument("fd_differentiate: order must be 1, 2 or 3");
    }
}

} // namespace igflow
