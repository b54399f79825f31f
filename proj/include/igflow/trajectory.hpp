#pragma once

#include <cmath>
#include <string_view>
#include <utility>
#include <vector>

#include "igflow/types.hpp"

namespace igflow {

enum class TerminationReason { Completed, DomainExit, SingularMetric };

inline std::string_view to_string(TerminationReason r) {
    switch (r) {
    case TerminationReason::Completed: return "Completed";
    case TerminationReason::DomainExit: return "DomainExit";
    case TerminationReason::SingularMetric: return "SingularMetric";
    }
    return "?";
}

/// Time-stamped samples of a curve in one chart. `velocities[n]` is the ODE
/// right-hand side evaluated at `points[n]`. Immutable once built.
class Trajectory {
public:
    Trajectory(Chart chart, std::vector<double> times, std::vector<Vec> points,
               std::vector<Vec> velocities, TerminationReason reason)
        : chart_(chart),
          times_(std::move(times)),
          points_(std::move(points)),
          velocities_(std::move(velocities)),
          reason_(reason) {
        if (times_.size() != points_.size() || times_.size() != velocities_.size())
            throw std::invalid_argument("Trajectory: column lengths differ");
        for (std::size_t n = 1; n < times_.size(); ++n)
            if (!(times_[n] > times_[n - 1]))
                throw std::invalid_argument("Trajectory: times must be strictly increasing");
    }

    Chart chart() const { return chart_; }
    TerminationReason terminated_reason() const { return reason_; }
    std::size_t size() const { return times_.size(); }
    int dim() const { return points_.empty() ? 0 : static_cast<int>(points_.front().size()); }

    const std::vector<double>& times() const { return times_; }
    const std::vector<Vec>& points() const { return points_; }
    const std::vector<Vec>& velocities() const { return velocities_; }

    double end_time() const { return times_.empty() ? 0.0 : times_.back(); }

    /// Number of leading samples spaced by the first interval (to a relative
    /// 1e-9). A shortened final step, e.g. at a domain exit, is excluded.
    std::size_t uniform_prefix() const {
        if (times_.size() < 2) return times_.size();
        const double h = times_[1] - times_[0];
        std::size_t n = 2;
        while (n < times_.size() && std::abs((times_[n] - times_[n - 1]) - h) <= 1e-9 * h) ++n;
        return n;
    }

    double spacing() const { return times_.size() < 2 ? 0.0 : times_[1] - times_[0]; }

private:
    Chart chart_;
    std::vector<double> times_;
    std::vector<Vec> points_;
    std::vector<Vec> velocities_;
    TerminationReason reason_;
};

/// Cubic Hermite interpolation of position and velocity between samples n and
/// n+1 at fraction s in [0, 1].
inline std::pair<Vec, Vec> hermite(const Trajectory& c, std::size_t n, double s) {
    const double h = c.times()[n + 1] - c.times()[n];
    const Vec& x0 = c.points()[n];
    const Vec& x1 = c.points()[n + 1];
    const Vec& v0 = c.velocities()[n];
    const Vec& v1 = c.velocities()[n + 1];
    const double s2 = s * s, s3 = s2 * s;
    const double h00 = 2 * s3 - 3 * s2 + 1, h10 = s3 - 2 * s2 + s;
    const double h01 = -2 * s3 + 3 * s2, h11 = s3 - s2;
    const Vec x = h00 * x0 + h10 * h * v0 + h01 * x1 + h11 * h * v1;
    const double d00 = 6 * s2 - 6 * s, d10 = 3 * s2 - 4 * s + 1;
    const double d01 = -6 * s2 + 6 * s, d11 = 3 * s2 - 2 * s;
    const Vec v = (d00 * x0 + d01 * x1) / h + d10 * v0 + d11 * v1;
    return {x, v};
}

} // namespace igflow
