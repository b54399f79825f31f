#pragma once

// Config-driven experiment runner behind the `igflow` command-line tool.
//
// A config is a flat JSON object whose keys are dotted paths:
//
//   {
//     "model": "exp1d",
//     "initial.chart": "theta",          // or "eta"
//     "initial.coords": [0.0],
//     "flow.t_end": 1.0, "flow.step": 0.001, "flow.method": "rk4",   // or "dp45"
//     "flow.rel_tol": 1e-9, "flow.abs_tol": 1e-12, "flow.boundary_margin": 1e-6,
//     "checks": "all",                   // or a list of check names
//     "output_dir": "out/exp1d",
//     "seed": 42,
//     "sweep.steps": [0.004, 0.002, 0.001], "sweep.min_slope": 1.9
//   }
//
// Only "model" and "initial.coords" are required.

#include <algorithm>
#include <array>
#include <filesystem>
#include <fstream>
#include <future>
#include <limits>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "igflow/connections.hpp"
#include "igflow/dual.hpp"
#include "igflow/flows.hpp"
#include "igflow/geodesic.hpp"
#include "igflow/io.hpp"
#include "igflow/models.hpp"

namespace igflow {

inline const std::array<std::string_view, 9>& check_names() {
    static const std::array<std::string_view, 9> names{
        "orthogonality", "linearization", "hamiltonian", "rates",      "pregeodesic",
        "weyl",          "gauge",         "transport",   "proper_time"};
    return names;
}

/// Pass threshold for each check's max residual.
inline double check_tolerance(std::string_view check) {
    if (check == "orthogonality") return 1e-4;
    if (check == "linearization") return 1e-8;
    if (check == "hamiltonian") return 1e-8;
    if (check == "rates") return 1e-4;
    if (check == "pregeodesic") return 1e-5;
    if (check == "weyl") return 1e-5;
    if (check == "gauge") return 1e-6;
    if (check == "transport") return 1e-4;
    if (check == "proper_time") return 1e-5;
    throw ConfigError("unknown check '" + std::string(check) + "'");
}

struct ExperimentConfig {
    std::string model;
    Point initial;
    FlowConfig flow;
    std::vector<std::string> checks;
    std::string output_dir = "igflow_out";
    std::uint64_t seed = 42;
    std::vector<double> sweep_steps{4e-3, 2e-3, 1e-3};
    double sweep_min_slope = 1.9;
};

inline ExperimentConfig parse_config(const nlohmann::json& j) {
    if (!j.is_object()) throw ConfigError("config must be a JSON object");
    static const std::vector<std::string> known{
        "model",        "initial.chart",        "initial.coords", "flow.t_end",  "flow.step",
        "flow.method",  "flow.rel_tol",         "flow.abs_tol",   "flow.boundary_margin",
        "checks",       "output_dir",           "seed",           "sweep.steps", "sweep.min_slope"};
    for (const auto& [key, _] : j.items())
        if (std::find(known.begin(), known.end(), key) == known.end())
            throw ConfigError("unknown config key '" + key + "'");

    ExperimentConfig c;
    try {
        if (!j.contains("model")) throw ConfigError("missing key 'model'");
        c.model = j.at("model").get<std::string>();
        if (!j.contains("initial.coords")) throw ConfigError("missing key 'initial.coords'");
        const auto coords = j.at("initial.coords").get<std::vector<double>>();
        if (coords.empty()) throw ConfigError("initial.coords must be non-empty");
        c.initial.coords = Eigen::Map<const Vec>(coords.data(), static_cast<Eigen::Index>(coords.size()));
        const std::string chart = j.value("initial.chart", std::string("theta"));
        if (chart == "theta")
            c.initial.chart = Chart::Theta;
        else if (chart == "eta")
            c.initial.chart = Chart::Eta;
        else
            throw ConfigError("initial.chart must be 'theta' or 'eta'");

        c.flow.t_end = j.value("flow.t_end", c.flow.t_end);
        c.flow.step = j.value("flow.step", c.flow.step);
        c.flow.rel_tol = j.value("flow.rel_tol", c.flow.rel_tol);
        c.flow.abs_tol = j.value("flow.abs_tol", c.flow.abs_tol);
        c.flow.boundary_margin = j.value("flow.boundary_margin", c.flow.boundary_margin);
        const std::string method = j.value("flow.method", std::string("rk4"));
        if (method == "rk4")
            c.flow.method = Method::RK4;
        else if (method == "dp45")
            c.flow.method = Method::DP45;
        else
            throw ConfigError("flow.method must be 'rk4' or 'dp45'");
        c.flow.validate();

        const auto& names = check_names();
        if (!j.contains("checks") || (j.at("checks").is_string() && j.at("checks") == "all")) {
            c.checks.assign(names.begin(), names.end());
        } else {
            c.checks = j.at("checks").get<std::vector<std::string>>();
            if (c.checks.empty()) throw ConfigError("checks must be non-empty");
            for (const auto& name : c.checks)
                if (std::find(names.begin(), names.end(), name) == names.end())
                    throw ConfigError("unknown check '" + name + "'");
        }

        c.output_dir = j.value("output_dir", c.output_dir);
        c.seed = j.value("seed", c.seed);
        if (j.contains("sweep.steps")) c.sweep_steps = j.at("sweep.steps").get<std::vector<double>>();
        if (c.sweep_steps.size() < 2) throw ConfigError("sweep.steps needs at least two steps");
        for (double h : c.sweep_steps)
            if (!(h > 0.0)) throw ConfigError("sweep.steps must be positive");
        c.sweep_min_slope = j.value("sweep.min_slope", c.sweep_min_slope);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("malformed config: ") + e.what());
    }
    return c;
}

inline ExperimentConfig load_config(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ConfigError("cannot read config file " + path);
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(f);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    return parse_config(j);
}

enum class CheckStatus { Pass, Fail, Skip };

inline std::string_view to_string(CheckStatus s) {
    switch (s) {
    case CheckStatus::Pass: return "pass";
    case CheckStatus::Fail: return "fail";
    case CheckStatus::Skip: return "skip";
    }
    return "?";
}

struct NamedSeries {
    std::string name;
    ResidualSeries series;
};

struct CheckResult {
    std::string name;
    double max_residual = 0.0;
    double tolerance = 0.0;
    CheckStatus status = CheckStatus::Skip;
    std::string note;
    std::vector<NamedSeries> series;
    /// Only the first `gated` series count toward max_residual; the rest are
    /// diagnostic.
    std::size_t gated = std::numeric_limits<std::size_t>::max();
};

struct ExperimentReport {
    std::string model;
    Trajectory theta_flow;
    Trajectory eta_flow;
    std::vector<CheckResult> checks;

    bool all_passed() const {
        return std::none_of(checks.begin(), checks.end(),
                            [](const CheckResult& c) { return c.status == CheckStatus::Fail; });
    }
};

namespace detail {

inline double max_of(const CheckResult& r) {
    double m = 0.0;
    for (std::size_t k = 0; k < std::min(r.gated, r.series.size()); ++k)
        m = std::max(m, r.series[k].series.max());
    return m;
}

inline ResidualSeries series_from(const Trajectory& traj, const std::vector<double>& values) {
    return {traj.times(), values};
}

/// 5-point difference of a sampled scalar over the uniform prefix interior.
inline ResidualSeries sampled_rate(const Trajectory& traj, const std::vector<double>& values) {
    ResidualSeries out;
    const std::size_t n = traj.uniform_prefix();
    const double h = traj.spacing();
    for (std::size_t k = 2; k + 2 < n; ++k) {
        out.times.push_back(traj.times()[k]);
        out.values.push_back(five_point_derivative(values, k, h));
    }
    return out;
}

/// Sample indices spread over [0, n) with at most `count` entries.
inline std::vector<std::size_t> strided(std::size_t n, std::size_t count) {
    std::vector<std::size_t> idx;
    const std::size_t stride = std::max<std::size_t>(1, (n + count - 1) / count);
    for (std::size_t k = 0; k < n; k += stride) idx.push_back(k);
    return idx;
}

inline CheckResult check_orthogonality(const PotentialModel& m, const Trajectory& th) {
    CheckResult r;
    ResidualSeries fd, inv;
    std::size_t skipped = 0;
    for (std::size_t k : strided(th.size(), 200)) {
        const Point p = Point::theta(th.points()[k]);
        try {
            fd.values.push_back(orthogonality_residual(m, p));
            fd.times.push_back(th.times()[k]);
        } catch (const DomainError&) {
            ++skipped; // stencil of the dual Hessian leaves the eta-domain
        }
        inv.times.push_back(th.times()[k]);
        inv.values.push_back(orthogonality_residual_inverse(m, p));
    }
    r.series = {{"fd_dual_hessian", fd}, {"matrix_inverse", inv}};
    if (skipped) r.note = std::to_string(skipped) + " samples too close to the eta-boundary for the FD stencil";
    return r;
}

inline CheckResult check_linearization(const PotentialModel& m, const Trajectory& th, const Trajectory& et) {
    CheckResult r;
    const std::vector<Vec> eta_img = dual_image(m, th);
    const std::vector<Vec> theta_img = dual_image(m, et);
    std::vector<double> a, b;
    for (std::size_t n = 0; n < th.size(); ++n)
        a.push_back((eta_img[n] - closed_form_dual_flow(eta_img[0], th.times()[n], +1)).lpNorm<Eigen::Infinity>());
    for (std::size_t n = 0; n < et.size(); ++n)
        b.push_back((theta_img[n] - closed_form_dual_flow(theta_img[0], et.times()[n], -1)).lpNorm<Eigen::Infinity>());
    r.series = {{"theta_flow_eta_image", series_from(th, a)}, {"eta_flow_theta_image", series_from(et, b)}};
    return r;
}

inline CheckResult check_hamiltonian(const PotentialModel& m, const Trajectory& th, const Trajectory& et) {
    CheckResult r;
    if (m.dim() % 2 != 0) {
        r.status = CheckStatus::Skip;
        r.note = "odd dimension: no (Q, P) pairing";
        return r;
    }
    auto drift = [](const std::vector<Vec>& q) {
        std::vector<double> d;
        const double h0 = hamiltonian(q.front());
        for (const Vec& x : q) d.push_back(std::abs(hamiltonian(x) - h0));
        return d;
    };
    try {
        r.series = {{"theta_flow_eta_image", series_from(th, drift(dual_image(m, th)))},
                    {"eta_flow_theta_image", series_from(et, drift(dual_image(m, et)))}};
    } catch (const DivisionByZeroError& e) {
        r.status = CheckStatus::Skip;
        r.note = e.what();
    }
    return r;
}

inline CheckResult check_rates(const PotentialModel& m, const Trajectory& th, const Trajectory& et) {
    CheckResult r;
    r.series.push_back({"potential_rate", series_from(th, potential_rate_residual(m, th))});
    r.series.push_back({"entropy_rate", series_from(et, entropy_rate_residual(m, et))});

    // Independent route: difference the sampled potentials in time.
    std::vector<double> psi, eta2;
    for (const Vec& x : th.points()) {
        psi.push_back(m.eval(x));
        eta2.push_back(eta_squared_at(m, x));
    }
    ResidualSeries d = sampled_rate(th, psi);
    for (std::size_t k = 0; k < d.size(); ++k) d.values[k] = std::abs(d.values[k] - eta2[k + 2]);
    r.series.push_back({"potential_rate_fd", d});

    const std::vector<Vec> thetas = dual_image(m, et);
    std::vector<double> psi_star, theta2;
    for (std::size_t n = 0; n < et.size(); ++n) {
        const Vec& t = thetas[n];
        psi_star.push_back(t.dot(et.points()[n]) - m.eval(t));
        theta2.push_back(t.dot(metric_at(m, t) * t));
    }
    ResidualSeries e = sampled_rate(et, psi_star);
    for (std::size_t k = 0; k < e.size(); ++k) e.values[k] = std::abs(-e.values[k] - theta2[k + 2]);
    r.series.push_back({"entropy_rate_fd", e});
    return r;
}

inline CheckResult check_weyl(const PotentialModel& m, const Trajectory& th) {
    CheckResult r;
    const ResidualSeries w = weyl_pregeodesic_residual(m, th);
    const ResidualSeries mix = pregeodesic_residual(m, th);
    ResidualSeries diff{w.times, {}};
    for (std::size_t k = 0; k < w.size(); ++k) diff.values.push_back(std::abs(w.values[k] - mix.values[k]));
    const WeylStructure s = induced_weyl_structure(m);
    ResidualSeries nm;
    for (std::size_t k = 0; k < th.size(); ++k) {
        const Vec& x = th.points()[k];
        nm.times.push_back(th.times()[k]);
        nm.values.push_back(nonmetricity_residual(s.metric, weyl_connection(s, x), s.covector(x), x));
    }
    r.series = {{"weyl_pregeodesic", w}, {"weyl_minus_mixture", diff}, {"nonmetricity", nm}};
    return r;
}

/// Random quadratic polynomial gauge function around `center`.
inline ScalarField random_gauge(std::mt19937_64& rng, const Vec& center) {
    std::uniform_real_distribution<double> u(-0.5, 0.5);
    const int n = static_cast<int>(center.size());
    const double c0 = u(rng);
    Vec lin(n);
    Mat quad(n, n);
    for (int i = 0; i < n; ++i) lin(i) = u(rng);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) quad(i, j) = u(rng);
    quad = 0.5 * (quad + quad.transpose()).eval();
    return [=](const Vec& x) {
        const Vec d = x - center;
        return c0 + lin.dot(d) + d.dot(quad * d);
    };
}

inline CheckResult check_gauge(const PotentialModel& m, const Trajectory& th, std::uint64_t seed) {
    CheckResult r;
    std::mt19937_64 rng(seed);
    const WeylStructure s = induced_weyl_structure(m);
    std::vector<ScalarField> gauges;
    for (int g = 0; g < 20; ++g) gauges.push_back(random_gauge(rng, th.points().front()));
    ResidualSeries out;
    for (std::size_t k : strided(th.size(), 50)) {
        const Vec& x = th.points()[k];
        const Tensor3 base = weyl_connection(s, x);
        double worst = 0.0;
        for (const auto& lambda : gauges) {
            const Tensor3 gauged = weyl_connection(gauge_transform(s, lambda), x);
            worst = std::max(worst, (gauged - base).max_abs());
        }
        out.times.push_back(th.times()[k]);
        out.values.push_back(worst);
    }
    r.series = {{"gauge_invariance", out}};
    return r;
}

inline CheckResult check_transport(const PotentialModel& m, const Trajectory& th) {
    CheckResult r;
    const WeylStructure s = induced_weyl_structure(m);
    const ConnectionField gamma = weyl_field(s);
    const int n = m.dim();
    const Vec v0 = Vec::Unit(n, 0);
    const Vec u0 = Vec::Ones(n);
    const auto vs = parallel_transport(gamma, th, v0);
    const auto us = parallel_transport(gamma, th, u0);
    std::vector<double> inner;
    for (std::size_t k = 0; k < th.size(); ++k)
        inner.push_back(vs[k].dot(metric_at(m, th.points()[k]) * us[k]));
    ResidualSeries law = sampled_rate(th, inner);
    for (std::size_t k = 0; k < law.size(); ++k) {
        const std::size_t idx = k + 2;
        const double w = s.covector(th.points()[idx]).dot(th.velocities()[idx]);
        law.values[k] = std::abs(law.values[k] - w * inner[idx]);
    }
    r.series = {{"metric_law", law}};
    return r;
}

inline CheckResult check_proper_time(const PotentialModel& m, const Trajectory& th) {
    CheckResult r;
    const ResidualSeries defect = proper_time_defect(m, th);
    const ResidualSeries du2 = speed_squared_rate(m, th);
    ResidualSeries id{defect.times, {}};
    for (std::size_t k = 0; k < defect.size(); ++k)
        id.values.push_back(std::abs(defect.values[k] - 2.0 * du2.values[k]));
    r.series = {{"defect_minus_2du2", id}, {"defect", defect}};
    r.gated = 1;
    std::ostringstream os;
    os << "defect range [" << format_number(defect.min()) << ", "
       << format_number(*std::max_element(defect.values.begin(), defect.values.end())) << "]";
    r.note = os.str();
    return r;
}

inline const PotentialModel& lookup(const ModelRegistry& reg, const std::string& name) {
    const PotentialModel* m = reg.find(name);
    if (!m) throw ConfigError("unknown model '" + name + "'");
    return *m;
}

inline Point initial_theta(const PotentialModel& m, const Point& p) {
    if (p.dim() != m.dim()) throw ConfigError("initial.coords has the wrong dimension for " + m.name());
    return p.chart == Chart::Theta ? p : from_dual(m, p);
}

} // namespace detail

/// Integrates both flows from matched initial data (theta0 and eta0 =
/// grad Psi(theta0)) and evaluates the requested checks.
inline ExperimentReport run_experiment(const ExperimentConfig& cfg, const ModelRegistry& reg) {
    const PotentialModel& m = detail::lookup(reg, cfg.model);
    const Point theta0 = detail::initial_theta(m, cfg.initial);
    Trajectory th = integrate_theta_flow(m, theta0, cfg.flow);
    Trajectory et = integrate_eta_flow(m, to_dual(m, theta0), cfg.flow);

    ExperimentReport rep{m.name(), th, et, {}};
    for (const auto& name : cfg.checks) {
        CheckResult r;
        try {
            if (name == "orthogonality") r = detail::check_orthogonality(m, th);
            else if (name == "linearization") r = detail::check_linearization(m, th, et);
            else if (name == "hamiltonian") r = detail::check_hamiltonian(m, th, et);
            else if (name == "rates") r = detail::check_rates(m, th, et);
            else if (name == "pregeodesic") r.series = {{"mixture_pregeodesic", pregeodesic_residual(m, th)}};
            else if (name == "weyl") r = detail::check_weyl(m, th);
            else if (name == "gauge") r = detail::check_gauge(m, th, cfg.seed);
            else if (name == "transport") r = detail::check_transport(m, th);
            else if (name == "proper_time") r = detail::check_proper_time(m, th);
            else throw ConfigError("unknown check '" + name + "'");

            r.max_residual = detail::max_of(r);
            if (r.series.empty()) {
                r.status = CheckStatus::Skip;
            } else {
                r.status = r.max_residual <= check_tolerance(name) ? CheckStatus::Pass : CheckStatus::Fail;
                // t is expected not to be a proper time: a vanishing defect is a failure.
                if (name == "proper_time" && r.series[1].series.max() <= check_tolerance(name)) {
                    r.status = CheckStatus::Fail;
                    r.note += "; defect vanishes";
                }
            }
        } catch (const ConfigError&) {
            throw;
        } catch (const Error& e) {
            r.status = CheckStatus::Fail;
            r.max_residual = std::numeric_limits<double>::quiet_NaN();
            r.note = e.what();
        }
        r.name = name;
        r.tolerance = check_tolerance(name);
        rep.checks.push_back(std::move(r));
    }
    return rep;
}

/// Writes <dir>/<check>.csv (series,t,residual), summary.csv,
/// summary.txt, theta_flow.csv and eta_flow.csv.
inline void write_report(const ExperimentReport& rep, const ExperimentConfig& cfg) {
    namespace fs = std::filesystem;
    const fs::path dir(cfg.output_dir);
    fs::create_directories(dir);

    for (const auto& c : rep.checks) {
        write_file((dir / (c.name + ".csv")).string(), [&](std::ostream& os) {
            os << "series,t,residual\n";
            for (const auto& s : c.series)
                for (std::size_t k = 0; k < s.series.size(); ++k)
                    os << s.name << ',' << format_number(s.series.times[k]) << ','
                       << format_number(s.series.values[k]) << '\n';
        });
    }
    write_file((dir / "summary.csv").string(), [&](std::ostream& os) {
        os << "check,max_residual,tolerance,status\n";
        for (const auto& c : rep.checks)
            os << c.name << ',' << format_number(c.max_residual) << ',' << format_number(c.tolerance) << ','
               << to_string(c.status) << '\n';
    });
    write_file((dir / "summary.txt").string(), [&](std::ostream& os) {
        os << "model: " << rep.model << '\n';
        os << "initial.chart: " << to_string(cfg.initial.chart) << '\n';
        os << "initial.coords: " << format_vector(cfg.initial.coords) << '\n';
        write_trajectory_summary(os, "theta_flow", rep.theta_flow);
        write_trajectory_summary(os, "eta_flow", rep.eta_flow);
        for (const auto& c : rep.checks) {
            os << "check." << c.name << ": " << to_string(c.status) << " max_residual="
               << format_number(c.max_residual) << " tolerance=" << format_number(c.tolerance);
            if (!c.note.empty()) os << " note=\"" << c.note << '"';
            os << '\n';
        }
    });
    write_file((dir / "theta_flow.csv").string(), [&](std::ostream& os) { write_trajectory_csv(os, rep.theta_flow); });
    write_file((dir / "eta_flow.csv").string(), [&](std::ostream& os) { write_trajectory_csv(os, rep.eta_flow); });
}

struct SweepResult {
    std::vector<double> steps;
    std::vector<double> max_residuals;
    double slope = 0.0;
    bool passed = false;
};

/// Step-halving study of the mixture pre-geodesic residual (max over
/// t in [0.1, 0.9] of the theta-flow). Runs are independent and execute
/// concurrently; results are collected in step order.
inline SweepResult run_sweep(const ExperimentConfig& cfg, const ModelRegistry& reg) {
    const PotentialModel& m = detail::lookup(reg, cfg.model);
    const Point theta0 = detail::initial_theta(m, cfg.initial);
    std::vector<std::future<double>> jobs;
    for (double h : cfg.sweep_steps) {
        FlowConfig fc = cfg.flow;
        fc.step = h;
        jobs.push_back(std::async(std::launch::async, [&m, theta0, fc] {
            const Trajectory t = integrate_theta_flow(m, theta0, fc);
            return pregeodesic_residual(m, t).max_over(0.1, 0.9);
        }));
    }
    SweepResult out;
    out.steps = cfg.sweep_steps;
    for (auto& j : jobs) out.max_residuals.push_back(j.get());
    out.slope = loglog_slope(out.steps, out.max_residuals);
    out.passed = out.slope >= cfg.sweep_min_slope;
    return out;
}

inline void write_sweep(const SweepResult& s, const ExperimentConfig& cfg) {
    namespace fs = std::filesystem;
    fs::create_directories(cfg.output_dir);
    write_file((fs::path(cfg.output_dir) / "sweep.csv").string(), [&](std::ostream& os) {
        os << "step,max_residual\n";
        for (std::size_t k = 0; k < s.steps.size(); ++k)
            os << format_number(s.steps[k]) << ',' << format_number(s.max_residuals[k]) << '\n';
    });
}

} // namespace igflow
