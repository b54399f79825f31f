// igflow: run gradient-flow experiments and their geometric checks.
//
//   igflow run <config.json>     exit 0 all checks pass, 1 a check failed, 2 config error
//   igflow list-models
//   igflow sweep <config.json>   step-halving convergence study

#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"

#include "igflow/experiment.hpp"

namespace {

int do_run(const std::string& path) {
    const auto reg = igflow::ModelRegistry::builtin();
    igflow::ExperimentConfig cfg;
    try {
        cfg = igflow::load_config(path);
        if (!reg.find(cfg.model)) throw igflow::ConfigError("unknown model '" + cfg.model + "'");
    } catch (const igflow::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    }

    std::optional<igflow::ExperimentReport> result;
    try {
        result = igflow::run_experiment(cfg, reg);
    } catch (const igflow::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const igflow::Error& e) {
        // The flows could not be started, e.g. initial point outside the domain.
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    const auto& rep = *result;
    igflow::write_report(rep, cfg);

    for (const auto& tr : {&rep.theta_flow, &rep.eta_flow}) {
        if (tr->terminated_reason() != igflow::TerminationReason::Completed)
            std::cout << to_string(tr->chart()) << "-flow: " << to_string(tr->terminated_reason())
                      << " at t=" << igflow::format_number(tr->end_time()) << '\n';
    }
    for (const auto& c : rep.checks) {
        std::cout << c.name << ' ' << to_string(c.status) << " max_residual="
                  << igflow::format_number(c.max_residual) << " tolerance=" << igflow::format_number(c.tolerance);
        if (!c.note.empty()) std::cout << " (" << c.note << ')';
        std::cout << '\n';
        if (c.status == igflow::CheckStatus::Fail) std::cerr << "check failed: " << c.name << '\n';
    }
    return rep.all_passed() ? 0 : 1;
}

int do_sweep(const std::string& path) {
    const auto reg = igflow::ModelRegistry::builtin();
    igflow::ExperimentConfig cfg;
    try {
        cfg = igflow::load_config(path);
        if (!reg.find(cfg.model)) throw igflow::ConfigError("unknown model '" + cfg.model + "'");
    } catch (const igflow::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    }
    try {
        const auto s = igflow::run_sweep(cfg, reg);
        igflow::write_sweep(s, cfg);
        for (std::size_t k = 0; k < s.steps.size(); ++k)
            std::cout << "step=" << igflow::format_number(s.steps[k])
                      << " max_residual=" << igflow::format_number(s.max_residuals[k]) << '\n';
        std::cout << "slope=" << igflow::format_number(s.slope) << " min_slope="
                  << igflow::format_number(cfg.sweep_min_slope) << ' ' << (s.passed ? "pass" : "fail") << '\n';
        return s.passed ? 0 : 1;
    } catch (const igflow::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Gradient flows on dually flat manifolds and their Weyl pre-geodesic checks"};
    app.require_subcommand(1);

    std::string run_path, sweep_path;
    auto* run = app.add_subcommand("run", "Integrate both flows and run the configured checks");
    run->add_option("config", run_path, "JSON config file")->required();
    auto* list = app.add_subcommand("list-models", "List the built-in potentials");
    auto* sweep = app.add_subcommand("sweep", "Step-halving convergence study of the pre-geodesic residual");
    sweep->add_option("config", sweep_path, "JSON config file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    if (*run) return do_run(run_path);
    if (*sweep) return do_sweep(sweep_path);
    if (*list) {
        std::cout << igflow::list_models(igflow::ModelRegistry::builtin());
        return 0;
    }
    return 2;
}
