#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <utility>

#include "igflow/fd.hpp"
#include "igflow/tensor3.hpp"
#include "igflow/types.hpp"

namespace igflow {

/// Signed distance-like measure to the boundary of an open region: positive
/// inside, non-positive outside, +infinity when the region is unbounded in
/// every direction that matters.
using BoundaryDistance = std::function<double(const Vec&)>;
using CubicField = std::function<Tensor3(const Vec&)>;

inline BoundaryDistance whole_space() {
    return [](const Vec&) { return std::numeric_limits<double>::infinity(); };
}

/// Smallest pivot a Hessian may have and still count as positive definite.
inline constexpr double kPivotTolerance = 1e-10;

/// Throws ConvexityError unless `m` is symmetric positive definite, judged by
/// the smallest pivot of an LDL^T factorisation.
inline void check_positive_definite(const Mat& m, std::string_view what = "metric") {
    if (!m.allFinite()) throw ConvexityError(std::string(what) + " has non-finite entries");
    const Eigen::LDLT<Mat> ldlt(m);
    if (ldlt.info() != Eigen::Success || ldlt.vectorD().minCoeff() <= kPivotTolerance) {
        std::ostringstream os;
        os << what << " is not positive definite (smallest pivot "
           << (ldlt.info() == Eigen::Success ? ldlt.vectorD().minCoeff()
                                             : std::numeric_limits<double>::quiet_NaN())
           << ")";
        throw ConvexityError(os.str());
    }
}

/// A strictly convex potential Psi(theta) on an open domain.
///
/// Immutable value object. Only `eval` is mandatory; gradient, Hessian and
/// third derivative fall back to central finite differences of `eval` when no
/// closed form has been attached. Every entry point validates dimension and
/// domain membership and raises DomainError outside the domain.
class PotentialModel {
public:
    PotentialModel(std::string name, int dim, ScalarField eval, BoundaryDistance domain,
                   std::string domain_description, Vec reference)
        : name_(std::move(name)),
          dim_(dim),
          domain_description_(std::move(domain_description)),
          reference_(std::move(reference)),
          eval_(std::move(eval)),
          domain_(std::move(domain)),
          dual_domain_(whole_space()) {
        if (dim_ <= 0) throw std::invalid_argument("PotentialModel: dim must be positive");
        if (reference_.size() != dim_)
            throw std::invalid_argument("PotentialModel: reference point has wrong dimension");
        if (!in_domain(reference_))
            throw DomainError("PotentialModel '" + name_ + "': reference point outside domain");
    }

    PotentialModel with_gradient(CovectorField f) const {
        auto m = *this;
        m.grad_ = std::move(f);
        return m;
    }
    PotentialModel with_hessian(MatrixField f) const {
        auto m = *this;
        m.hess_ = std::move(f);
        return m;
    }
    PotentialModel with_third(CubicField f) const {
        auto m = *this;
        m.third_ = std::move(f);
        return m;
    }
    /// Declares the open image of the gradient map (the eta-domain).
    PotentialModel with_dual_domain(BoundaryDistance d) const {
        auto m = *this;
        m.dual_domain_ = std::move(d);
        return m;
    }

    const std::string& name() const { return name_; }
    int dim() const { return dim_; }
    const std::string& domain_description() const { return domain_description_; }
    /// Interior point used as the default Newton guess for inversion.
    const Vec& reference() const { return reference_; }

    double boundary_distance(const Vec& theta) const { return domain_(theta); }
    double dual_boundary_distance(const Vec& eta) const { return dual_domain_(eta); }

    bool in_domain(const Vec& theta, double margin = 0.0) const {
        return theta.size() == dim_ && theta.allFinite() && domain_(theta) > margin;
    }
    bool in_dual_domain(const Vec& eta, double margin = 0.0) const {
        return eta.size() == dim_ && eta.allFinite() && dual_domain_(eta) > margin;
    }

    bool has_closed_form(int order) const {
        switch (order) {
        case 0: return true;
        case 1: return static_cast<bool>(grad_);
        case 2: return static_cast<bool>(hess_);
        case 3: return static_cast<bool>(third_);
        default: return false;
        }
    }

    double eval(const Vec& theta) const {
        check(theta);
        return eval_(theta);
    }

    Vec grad(const Vec& theta) const {
        check(theta);
        if (grad_) return grad_(theta);
        return fd_gradient(checked_eval(), theta);
    }

    /// Raw Hessian; see `metric()` for the positive-definiteness-checked form.
    Mat hess(const Vec& theta) const {
        check(theta);
        if (hess_) return hess_(theta);
        return fd_hessian(checked_eval(), theta);
    }

    Tensor3 third(const Vec& theta) const {
        check(theta);
        if (third_) return third_(theta);
        return fd_third(checked_eval(), theta);
    }

private:
    void check(const Vec& theta) const {
        if (theta.size() != dim_) {
            std::ostringstream os;
            os << name_ << ": point has dimension " << theta.size() << ", model has " << dim_;
            throw ChartError(os.str());
        }
        if (!in_domain(theta)) {
            std::ostringstream os;
            os << name_ << ": point (" << theta.transpose() << ") outside domain "
               << domain_description_;
            throw DomainError(os.str());
        }
    }

    ScalarField checked_eval() const {
        return [this](const Vec& x) { return eval(x); };
    }

    std::string name_;
    int dim_;
    std::string domain_description_;
    Vec reference_;
    ScalarField eval_;
    CovectorField grad_;
    MatrixField hess_;
    CubicField third_;
    BoundaryDistance domain_;
    BoundaryDistance dual_domain_;
};

// Operations on theta-chart points.

inline double eval_potential(const PotentialModel& m, const Point& p) {
    require_chart(p, Chart::Theta, "eval_potential");
    return m.eval(p.coords);
}

/// eta_i = dPsi/dtheta^i.
inline Vec gradient(const PotentialModel& m, const Point& p) {
    require_chart(p, Chart::Theta, "gradient");
    return m.grad(p.coords);
}

/// g_ij(theta), symmetrised and checked for positive definiteness.
inline Mat metric_at(const PotentialModel& m, const Vec& theta) {
    Mat g = m.hess(theta);
    g = 0.5 * (g + g.transpose()).eval();
    check_positive_definite(g);
    return g;
}

inline Mat metric(const PotentialModel& m, const Point& p) {
    require_chart(p, Chart::Theta, "metric");
    return metric_at(m, p.coords);
}

/// C_ijk = d^3 Psi / dtheta^i dtheta^j dtheta^k.
inline Tensor3 cubic_tensor(const PotentialModel& m, const Point& p) {
    require_chart(p, Chart::Theta, "cubic_tensor");
    return m.third(p.coords);
}

/// g^{ij}(theta) = inverse of the Hessian.
inline Mat inverse_metric_at(const PotentialModel& m, const Vec& theta) {
    const Mat g = metric_at(m, theta);
    return g.ldlt().solve(Mat::Identity(g.rows(), g.cols()));
}

} // namespace igflow
