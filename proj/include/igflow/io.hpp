#pragma once

// CSV and structured-text output. Numbers are written in the shortest decimal
// form that round-trips to the same double, so identical runs produce
// byte-identical files.

#include <charconv>
#include <cmath>
#include <fstream>
#include <ostream>
#include <string>
#include <system_error>

#include "igflow/geodesic.hpp"
#include "igflow/trajectory.hpp"

namespace igflow {

inline std::string format_number(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[64];
    const auto [end, ec] = std::to_chars(buf, buf + sizeof buf, x);
    if (ec != std::errc{}) throw std::runtime_error("format_number: to_chars failed");
    return std::string(buf, end);
}

inline std::string format_vector(const Vec& v) {
    std::string s = "[";
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        if (i) s += ", ";
        s += format_number(v(i));
    }
    return s + "]";
}

/// Columns: t, <chart>1..d, v1..vd.
inline void write_trajectory_csv(std::ostream& os, const Trajectory& traj) {
    const int d = traj.dim();
    const std::string prefix(to_string(traj.chart()));
    os << "t";
    for (int i = 1; i <= d; ++i) os << ',' << prefix << i;
    for (int i = 1; i <= d; ++i) os << ",v" << i;
    os << '\n';
    for (std::size_t n = 0; n < traj.size(); ++n) {
        os << format_number(traj.times()[n]);
        for (int i = 0; i < d; ++i) os << ',' << format_number(traj.points()[n](i));
        for (int i = 0; i < d; ++i) os << ',' << format_number(traj.velocities()[n](i));
        os << '\n';
    }
}

/// Columns: t, residual.
inline void write_series_csv(std::ostream& os, const ResidualSeries& s) {
    os << "t,residual\n";
    for (std::size_t n = 0; n < s.size(); ++n)
        os << format_number(s.times[n]) << ',' << format_number(s.values[n]) << '\n';
}

/// Key: value lines describing a trajectory run.
inline void write_trajectory_summary(std::ostream& os, std::string_view label, const Trajectory& traj) {
    os << label << ".chart: " << to_string(traj.chart()) << '\n';
    if (traj.size() > 0) os << label << ".initial_point: " << format_vector(traj.points().front()) << '\n';
    os << label << ".samples: " << traj.size() << '\n';
    os << label << ".end_time: " << format_number(traj.end_time()) << '\n';
    os << label << ".terminated_reason: " << to_string(traj.terminated_reason()) << '\n';
}

template <class Writer>
void write_file(const std::string& path, Writer&& w) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open " + path + " for writing");
    w(f);
    if (!f) throw std::runtime_error("failed writing " + path);
}

} // namespace igflow
