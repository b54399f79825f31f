#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "igflow/types.hpp"

namespace igflow {

/// Dense rank-3 array T(a, b, c) over a small dimension.
///
/// Connection coefficients use the layout [upper, lower, lower], i.e.
/// T(i, j, k) = Gamma^i_{jk}. Fully covariant arrays such as the cubic tensor
/// C_{ijk} use the same storage and are distinguished by the caller.
class Tensor3 {
public:
    Tensor3() = default;
    explicit Tensor3(int dim, double fill = 0.0)
        : dim_(dim), data_(static_cast<std::size_t>(dim * dim * dim), fill) {}

    int dim() const { return dim_; }

    double& operator()(int a, int b, int c) { return data_[index(a, b, c)]; }
    double operator()(int a, int b, int c) const { return data_[index(a, b, c)]; }

    /// M(b, c) = T(a, b, c).
    Mat slice(int a) const {
        Mat m(dim_, dim_);
        for (int b = 0; b < dim_; ++b)
            for (int c = 0; c < dim_; ++c) m(b, c) = (*this)(a, b, c);
        return m;
    }

    double max_abs() const {
        double m = 0.0;
        for (double x : data_) m = std::max(m, std::abs(x));
        return m;
    }

    /// Largest deviation from full symmetry under the 6 index permutations.
    double symmetry_defect() const {
        double d = 0.0;
        for (int a = 0; a < dim_; ++a)
            for (int b = 0; b < dim_; ++b)
                for (int c = 0; c < dim_; ++c) {
                    const double x = (*this)(a, b, c);
                    d = std::max({d, std::abs(x - (*this)(a, c, b)), std::abs(x - (*this)(b, a, c)),
                                  std::abs(x - (*this)(b, c, a)), std::abs(x - (*this)(c, a, b)),
                                  std::abs(x - (*this)(c, b, a))});
                }
        return d;
    }

    /// Largest |T(a, b, c) - T(a, c, b)|: torsion of a connection array.
    double lower_symmetry_defect() const {
        double d = 0.0;
        for (int a = 0; a < dim_; ++a)
            for (int b = 0; b < dim_; ++b)
                for (int c = b + 1; c < dim_; ++c)
                    d = std::max(d, std::abs((*this)(a, b, c) - (*this)(a, c, b)));
        return d;
    }

    /// Averages T(a, b, c) and T(a, c, b).
    Tensor3 symmetrized_lower() const {
        Tensor3 out(dim_);
        for (int a = 0; a < dim_; ++a)
            for (int b = 0; b < dim_; ++b)
                for (int c = 0; c < dim_; ++c)
                    out(a, b, c) = 0.5 * ((*this)(a, b, c) + (*this)(a, c, b));
        return out;
    }

    /// Contracts the first index with `m`: out(i, b, c) = m(i, l) T(l, b, c).
    Tensor3 contract_first(const Mat& m) const {
        Tensor3 out(dim_);
        for (int i = 0; i < dim_; ++i)
            for (int l = 0; l < dim_; ++l) {
                const double w = m(i, l);
                if (w == 0.0) continue;
                for (int b = 0; b < dim_; ++b)
                    for (int c = 0; c < dim_; ++c) out(i, b, c) += w * (*this)(l, b, c);
            }
        return out;
    }

    /// out^i = T(i, b, c) u^b v^c.
    Vec contract_lower(const Vec& u, const Vec& v) const {
        Vec out = Vec::Zero(dim_);
        for (int i = 0; i < dim_; ++i)
            for (int b = 0; b < dim_; ++b)
                for (int c = 0; c < dim_; ++c) out(i) += (*this)(i, b, c) * u(b) * v(c);
        return out;
    }

    Tensor3& operator+=(const Tensor3& o) {
        for (std::size_t n = 0; n < data_.size(); ++n) data_[n] += o.data_[n];
        return *this;
    }
    Tensor3& operator-=(const Tensor3& o) {
        for (std::size_t n = 0; n < data_.size(); ++n) data_[n] -= o.data_[n];
        return *this;
    }
    Tensor3& operator*=(double s) {
        for (double& x : data_) x *= s;
        return *this;
    }

    friend Tensor3 operator+(Tensor3 a, const Tensor3& b) { return a += b; }
    friend Tensor3 operator-(Tensor3 a, const Tensor3& b) { return a -= b; }
    friend Tensor3 operator*(double s, Tensor3 a) { return a *= s; }

private:
    std::size_t index(int a, int b, int c) const {
        return static_cast<std::size_t>((a * dim_ + b) * dim_ + c);
    }

    int dim_ = 0;
    std::vector<double> data_;
};

} // namespace igflow
